"""Energies, corrector norms, initial compatibility and the sweep driver."""

import numpy as np
import pytest

from porohom.cell import solve_cell_problems
from porohom.errors import ValidationError
from porohom.kinetics import ModelParams
from porohom.macro import HomogenizedCoefficients, run_macro
from porohom.mesh import (build_macro_mesh, build_perforated_mesh,
                          build_unit_cell_mesh)
from porohom.micro import TraceRequest, run_micro
from porohom.verify import (NORM_FIELDS, NormReport, convergence_study,
                            corrector_norms, energy_consistency,
                            initial_compatibility, macro_energy, micro_energy)

DOMAIN = (0.0, 1.2, 0.0, 1.0)


@pytest.fixture(scope="module")
def template():
    return build_unit_cell_mesh(0.25, 64, 0.1)


@pytest.fixture(scope="module")
def cell_sol(template):
    return solve_cell_problems(template)


@pytest.fixture(scope="module")
def plain_cell():
    return solve_cell_problems(build_unit_cell_mesh(0.0, 64, 0.1,
                                                    no_inclusion=True))


@pytest.fixture(scope="module")
def macro_mesh():
    return build_macro_mesh(DOMAIN, 0.033)


def short_params(**kw):
    base = dict(T=0.5, dt=0.01, epsilon=0.2, sample_stride=10)
    base.update(kw)
    return ModelParams(**base)


class TestEnergies:
    def test_both_forms_start_identically(self, template):
        mesh = build_perforated_mesh(DOMAIN, 0.2, template)
        trace = run_micro(mesh, short_params())
        _, e_quad, e_flux = micro_energy(trace)
        assert e_quad[0] == e_flux[0]

    def test_flux_form_frozen_without_kinetics(self, template):
        mesh = build_perforated_mesh(DOMAIN, 0.2, template)
        trace = run_micro(mesh, short_params(k_f=0.0, k_d=0.0))
        _, _, e_flux = micro_energy(trace)
        assert np.abs(e_flux - e_flux[0]).max() == 0.0

    def test_cross_form_agreement_short_run(self, template):
        mesh = build_perforated_mesh(DOMAIN, 0.2, template)
        trace = run_micro(mesh, short_params(T=1.0))
        assert energy_consistency(trace) <= 0.01

    def test_macro_initial_value_carries_porosity(self, macro_mesh, cell_sol):
        params = short_params()
        coeffs = HomogenizedCoefficients.from_cell_solution(cell_sol, params)
        trace = run_macro(macro_mesh, params, coeffs)
        _, e_quad, _ = macro_energy(trace)
        from porohom.fem import assemble_mass
        from porohom.micro import default_initials
        M = assemble_mass(macro_mesh)
        u0 = default_initials()["u"](macro_mesh.vertices[:, 0],
                                     macro_mesh.vertices[:, 1])
        expected = 0.5 * coeffs.porosity * (u0 @ (M @ u0))
        assert e_quad[0] == pytest.approx(expected, rel=1e-12)

    def test_macro_cross_form_agreement(self, macro_mesh, cell_sol):
        params = short_params(T=1.0)
        coeffs = HomogenizedCoefficients.from_cell_solution(cell_sol, params)
        trace = run_macro(macro_mesh, params, coeffs)
        assert energy_consistency(trace) <= 0.01


class TestCorrectorNorms:
    def test_self_comparison_is_exactly_zero(self, plain_cell):
        # exactly-identity corrector, matching meshes, the run against itself
        from porohom.cell import CellSolution
        from porohom.fem import NodalField
        mesh = plain_cell.mesh
        zeros = np.zeros(mesh.n_vertices)
        identity_cell = CellSolution(
            mesh=mesh,
            l1=NodalField(mesh, zeros), l2=NodalField(mesh, zeros),
            grad_l1=np.zeros((mesh.n_triangles, 2)),
            grad_l2=np.zeros((mesh.n_triangles, 2)),
            porosity=mesh.total_area, interface_measure=0.0)
        params = short_params(k_f=0.0, k_d=0.0, epsilon=1.0)
        trace = run_micro(mesh, params, initials={
            "u": lambda x, y: 1.0 + x, "v": lambda x, y: 1.0 + y,
            "w": lambda x, y: np.zeros_like(x)})
        rep = corrector_norms(trace, trace, identity_cell, params)
        assert rep.norm_u_C_L2 == 0.0
        assert rep.norm_grad_u == 0.0
        assert rep.norm_v_C_L2 == 0.0
        assert rep.norm_grad_v == 0.0
        assert rep.norm_w_C_L2 == 0.0
        assert rep.energy_sup_diff == 0.0

    def test_norms_finite_on_default_setup(self, template, cell_sol,
                                           macro_mesh):
        params = short_params(T=0.5)
        mesh = build_perforated_mesh(DOMAIN, 0.2, template)
        micro_trace = run_micro(mesh, params)
        coeffs = HomogenizedCoefficients.from_cell_solution(cell_sol, params)
        macro_trace = run_macro(macro_mesh, params, coeffs)
        rep = corrector_norms(micro_trace, macro_trace, cell_sol, params)
        rep.validate()
        for name in NORM_FIELDS:
            assert np.isfinite(getattr(rep, name))
        assert rep.norm_u_C_L2 > 0.0

    def test_sample_mismatch_rejected(self, template, cell_sol, macro_mesh):
        params = short_params(T=0.3)
        mesh = build_perforated_mesh(DOMAIN, 0.2, template)
        micro_trace = run_micro(mesh, params)
        coeffs = HomogenizedCoefficients.from_cell_solution(cell_sol, params)
        other = short_params(T=0.3, sample_stride=5)
        macro_trace = run_macro(macro_mesh, other, coeffs)
        with pytest.raises(ValidationError):
            corrector_norms(micro_trace, macro_trace, cell_sol, params)


class TestInitialCompatibility:
    def test_constant_tracks_interface_measure(self, template, cell_sol,
                                               macro_mesh):
        ones = lambda x, y: np.ones_like(np.asarray(x, dtype=float))
        table = initial_compatibility([0.2, 0.1], ones, cell_sol, DOMAIN,
                                      template, macro_mesh)
        # both sides equal |Omega| * (polygonal cell perimeter)
        expected = 1.2 * 2 * 64 * 0.25 * np.sin(np.pi / 64)
        for val in table["values"]:
            assert val == pytest.approx(expected, rel=1e-10)
        assert table["limit"] == pytest.approx(expected, rel=1e-10)
        # and the circle-based reference sits within the polygonal gap
        assert table["limit"] == pytest.approx(np.pi / 2 * 1.2, rel=1e-3)

    def test_zero_data_gives_zero(self, template, cell_sol, macro_mesh):
        zero = lambda x, y: np.zeros_like(np.asarray(x, dtype=float))
        table = initial_compatibility([0.2], zero, cell_sol, DOMAIN,
                                      template, macro_mesh)
        assert table["values"][0] == 0.0
        assert table["limit"] == 0.0

    def test_linear_data_converges_monotonically(self, template, cell_sol,
                                                 macro_mesh):
        w = lambda x, y: 3.0 * x + y
        table = initial_compatibility([0.2, 0.1], w, cell_sol, DOMAIN,
                                      template, macro_mesh)
        d2 = abs(table["values"][0] - table["limit"])
        d1 = abs(table["values"][1] - table["limit"])
        assert d1 < d2


class TestConvergenceStudy:
    def test_single_epsilon_matches_direct_call(self, template, cell_sol,
                                                macro_mesh):
        params = short_params(T=0.3)
        reports, artifacts = convergence_study(
            DOMAIN, template, cell_sol, macro_mesh, params, [0.2])
        assert len(reports) == 1
        mesh = build_perforated_mesh(DOMAIN, 0.2, template)
        micro_trace = run_micro(mesh, params)
        coeffs = HomogenizedCoefficients.from_cell_solution(cell_sol, params)
        macro_trace = run_macro(macro_mesh, params, coeffs)
        direct = corrector_norms(micro_trace, macro_trace, cell_sol, params)
        for name in NORM_FIELDS:
            if name.startswith("wall"):
                continue
            assert getattr(reports[0], name) == pytest.approx(
                getattr(direct, name), rel=1e-12)

    def test_rows_stream_through_callback(self, template, cell_sol,
                                          macro_mesh):
        seen = []
        convergence_study(DOMAIN, template, cell_sol, macro_mesh,
                          short_params(T=0.2), [0.2, 0.1],
                          on_row=lambda r: seen.append(r.epsilon))
        assert seen == [0.2, 0.1]

    def test_empty_eps_list_rejected(self, template, cell_sol, macro_mesh):
        with pytest.raises(ValidationError):
            convergence_study(DOMAIN, template, cell_sol, macro_mesh,
                              short_params(), [])


class TestNormReport:
    def test_row_order_matches_fields(self):
        rep = NormReport(epsilon=0.2, norm_u_C_L2=1.0, norm_grad_u=2.0,
                         norm_v_C_L2=3.0, norm_grad_v=4.0, norm_w_C_L2=5.0,
                         energy_sup_diff=6.0, wall_time_micro=7.0,
                         wall_time_macro=8.0)
        assert rep.as_row() == [0.2, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]

    def test_validation_rejects_negative_norm(self):
        rep = NormReport(epsilon=0.2, norm_u_C_L2=-1.0, norm_grad_u=0.0,
                         norm_v_C_L2=0.0, norm_grad_v=0.0, norm_w_C_L2=0.0,
                         energy_sup_diff=0.0, wall_time_micro=0.0,
                         wall_time_macro=0.0)
        with pytest.raises(ValidationError):
            rep.validate()
