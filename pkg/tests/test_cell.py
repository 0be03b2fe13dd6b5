"""Cell problems, effective tensors and the corrector field."""

import numpy as np
import pytest

from porohom.cell import corrector_at, effective_tensor, solve_cell_problems
from porohom.errors import InterpolationError, ValidationError
from porohom.fem import interpolate
from porohom.mesh import build_unit_cell_mesh


@pytest.fixture(scope="module")
def holed_solution():
    mesh = build_unit_cell_mesh(0.25, 64, 0.04)
    return solve_cell_problems(mesh)


@pytest.fixture(scope="module")
def plain_solution():
    mesh = build_unit_cell_mesh(0.0, 64, 0.1, no_inclusion=True)
    return solve_cell_problems(mesh)


class TestNoInclusion:
    def test_potentials_vanish(self, plain_solution):
        assert np.abs(plain_solution.l1.values).max() < 1e-8
        assert np.abs(plain_solution.l2.values).max() < 1e-8

    def test_identity_tensor(self, plain_solution):
        A = effective_tensor(plain_solution, 1.0)
        assert np.abs(A.matrix - np.eye(2)).max() < 1e-10

    def test_identity_corrector(self, plain_solution):
        C = corrector_at(plain_solution, np.array([0.3, 0.7]))
        assert np.abs(C - np.eye(2)).max() < 1e-12

    def test_unit_porosity_no_interface(self, plain_solution):
        assert plain_solution.porosity == pytest.approx(1.0, abs=1e-12)
        assert plain_solution.interface_measure == 0.0


class TestSymmetries:
    def test_l1_antisymmetric_in_x(self, holed_solution):
        sol = holed_solution
        rng = np.random.default_rng(3)
        pts = []
        while len(pts) < 50:
            p = rng.uniform(0.02, 0.98, 2)
            if np.linalg.norm(p - 0.5) > 0.27 and \
                    np.linalg.norm([1 - p[0] - 0.5, p[1] - 0.5]) > 0.27:
                pts.append(p)
        pts = np.array(pts)
        mirrored = np.column_stack([1.0 - pts[:, 0], pts[:, 1]])
        a = interpolate(sol.mesh, sol.l1.values, pts)
        b = interpolate(sol.mesh, sol.l1.values, mirrored)
        assert np.abs(a + b).max() < 5e-3  # discretization-level agreement

    def test_l2_is_l1_with_swapped_coordinates(self, holed_solution):
        sol = holed_solution
        rng = np.random.default_rng(4)
        pts = []
        while len(pts) < 50:
            p = rng.uniform(0.02, 0.98, 2)
            if np.linalg.norm(p - 0.5) > 0.27:
                pts.append(p)
        pts = np.array(pts)
        a = interpolate(sol.mesh, sol.l2.values, pts)
        b = interpolate(sol.mesh, sol.l1.values, pts[:, ::-1])
        assert np.abs(a - b).max() < 5e-3

    def test_zero_mean(self, holed_solution):
        holed_solution.validate()


class TestEffectiveTensor:
    def test_reference_value(self, holed_solution):
        A = effective_tensor(holed_solution, 1.0)
        assert A.matrix[0, 0] == pytest.approx(0.8358, rel=0.01)
        assert A.matrix[1, 1] == pytest.approx(0.8358, rel=0.01)

    def test_off_diagonal_decay(self, holed_solution):
        A = effective_tensor(holed_solution, 1.0)
        assert abs(A.matrix[0, 1]) <= 1e-8 * A.matrix[0, 0]

    def test_linearity_in_diffusion(self, holed_solution):
        A = effective_tensor(holed_solution, 1.0)
        B = effective_tensor(holed_solution, 2.0)
        assert np.abs(B.matrix - 2.0 * A.matrix).max() \
            <= 1e-14 * np.abs(B.matrix).max()

    def test_variational_diagonal_bounds(self, holed_solution):
        for D in (1.0, 2.0, 0.7):
            A = effective_tensor(holed_solution, D)
            for i in range(2):
                assert 0.0 < A.matrix[i, i] <= D

    def test_rejects_nonpositive_diffusion(self, holed_solution):
        with pytest.raises(ValidationError):
            effective_tensor(holed_solution, 0.0)

    def test_mesh_convergence_cauchy(self):
        vals = []
        for h in (0.08, 0.04, 0.02):
            mesh = build_unit_cell_mesh(0.25, 64, h)
            sol = solve_cell_problems(mesh)
            vals.append(effective_tensor(sol, 1.0).matrix[0, 0])
        assert abs(vals[2] - vals[1]) < abs(vals[1] - vals[0])


class TestCorrector:
    def test_mean_identity(self, holed_solution):
        # area-weighted mean of C equals (|Y^p|/D) A entrywise
        sol = holed_solution
        C = sol.corrector_per_triangle()
        mean = np.einsum("t,tij->ij", sol.mesh.element_areas, C)
        A = effective_tensor(sol, 1.0)
        target = A.matrix * sol.porosity
        # the raw (unsymmetrized) integral identity holds to quadrature exactness
        assert np.abs(mean - target).max() < 1e-10 + A.asymmetry

    def test_point_near_interface_finite(self, holed_solution):
        C = corrector_at(holed_solution, np.array([0.5, 0.02]))
        assert np.all(np.isfinite(C))
        assert C.shape == (2, 2)

    def test_inside_inclusion_not_found(self, holed_solution):
        with pytest.raises(InterpolationError):
            corrector_at(holed_solution, np.array([0.5, 0.5]))

    def test_vectorized_lookup(self, holed_solution):
        pts = np.array([[0.1, 0.1], [0.9, 0.2], [0.5, 0.03]])
        C = corrector_at(holed_solution, pts)
        assert C.shape == (3, 2, 2)


class TestCompatibility:
    def test_rhs_orthogonal_to_constants(self):
        # assembled periodic right-hand side sums to zero
        from porohom.cell import _periodic_reduction
        from porohom.fem import assemble_stiffness
        mesh = build_unit_cell_mesh(0.25, 64, 0.08)
        K = assemble_stiffness(mesh, np.eye(2))
        _, R = _periodic_reduction(mesh)
        for j in range(2):
            F = R.T @ (-(K @ mesh.vertices[:, j]))
            assert abs(F.sum()) < 1e-10
