"""Periodic cell problems on the unit pore cell.

Solving ``div(grad l_j + e_j) = 0`` with a no-flux condition on the hole
boundary and periodic faces yields the two corrector potentials; their
gradients give the effective diffusion tensor and the corrector matrix
field used by the verification norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import fem
from . import mesh as msh
from .errors import InterpolationError, ValidationError


@dataclass
class CellSolution:
    """Cell mesh with the two corrector potentials and derived measures."""

    mesh: object
    l1: fem.NodalField
    l2: fem.NodalField
    grad_l1: np.ndarray
    grad_l2: np.ndarray
    porosity: float
    interface_measure: float

    def validate(self, tol=1e-10):
        M = fem.assemble_mass(self.mesh)
        ones = np.ones(self.mesh.n_vertices)
        total = ones @ (M @ ones)
        for name, f in (("l1", self.l1), ("l2", self.l2)):
            mean = ones @ (M @ f.values) / total
            if abs(mean) > tol:
                raise ValidationError(f"{name} mean {mean:.3e} exceeds {tol:g}")
        if not (0.0 < self.porosity <= 1.0):
            raise ValidationError(f"porosity {self.porosity} outside (0, 1]")
        if self.interface_measure < 0.0:
            raise ValidationError("negative interface measure")
        return self

    def corrector_per_triangle(self):
        """(M, 2, 2) corrector matrix C_ij = d_ij + d l_j / d y_i per triangle."""
        c = np.empty((self.mesh.n_triangles, 2, 2))
        c[:, 0, 0] = 1.0 + self.grad_l1[:, 0]
        c[:, 1, 0] = self.grad_l1[:, 1]
        c[:, 0, 1] = self.grad_l2[:, 0]
        c[:, 1, 1] = 1.0 + self.grad_l2[:, 1]
        return c

    def base_tensor(self):
        """Dimensionless effective tensor (the D = 1 case)."""
        area = self.mesh.element_areas
        t = np.eye(2)
        raw = np.empty((2, 2))
        for j, g in enumerate((self.grad_l1, self.grad_l2)):
            for i in range(2):
                raw[i, j] = (t[i, j] * self.porosity
                             + float(area @ g[:, i])) / self.porosity
        return raw


@dataclass
class EffectiveTensor:
    """Symmetrized 2x2 effective diffusion matrix with its asymmetry residual."""

    matrix: np.ndarray
    asymmetry: float
    diffusion: float

    def validate(self, sym_tol=1e-12):
        m = self.matrix
        if abs(m[0, 1] - m[1, 0]) > sym_tol * max(1.0, abs(m).max()):
            raise ValidationError("effective tensor not symmetric")
        tr = m[0, 0] + m[1, 1]
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if tr <= 0 or det <= 0:
            raise ValidationError("effective tensor not positive-definite")
        for i in range(2):
            if not (0.0 < m[i, i] <= self.diffusion * (1.0 + 1e-12)):
                raise ValidationError(
                    f"diagonal entry {m[i, i]} outside (0, D={self.diffusion}]")
        return self


def _periodic_reduction(mesh):
    """Map each vertex to its periodic master; returns (master_ids, R).

    R is the boolean reduction matrix with one column per independent DOF;
    slave face vertices fold onto their masters, corners onto one vertex.
    """
    left, right, bottom, top = mesh.periodic_pairs()
    n = mesh.n_vertices
    master = np.arange(n)
    master[right] = left
    master[top] = master[bottom]  # bottom may itself alias through corners
    # resolve chains (the top-right corner maps right->left then top->bottom)
    for _ in range(2):
        master = master[master]
    uniq, inv = np.unique(master, return_inverse=True)
    R = sp.coo_matrix((np.ones(n), (np.arange(n), inv)),
                      shape=(n, len(uniq))).tocsr()
    return inv, R


def solve_cell_problems(cell_mesh, rel_tol=1e-12, max_iter=20000):
    """Solve the two periodic cell problems and package the solution.

    The weak form is ``int grad(l_j) . grad(phi) = -int e_j . grad(phi)``
    over the pore cell with periodically identified faces.  The right-hand
    side is assembled exactly as ``-K y_j`` (y_j the j-th coordinate), the
    constant-function kernel is removed by pinning one DOF during the solve,
    and the area-weighted mean is subtracted afterwards.
    """
    K = fem.assemble_stiffness(cell_mesh, np.eye(2))
    inv, R = _periodic_reduction(cell_mesh)
    Kr = (R.T @ K @ R).tocsr()
    n_red = Kr.shape[0]
    keep = np.arange(1, n_red)
    A = Kr[keep][:, keep].tocsr()

    M = fem.assemble_mass(cell_mesh)
    ones = np.ones(cell_mesh.n_vertices)
    total = ones @ (M @ ones)

    fields = []
    grads = []
    for j in range(2):
        F = -(K @ cell_mesh.vertices[:, j])
        Fr = R.T @ F
        compat = abs(Fr.sum())
        if compat > 1e-10 * (1.0 + np.abs(Fr).max()):
            raise ValidationError(
                f"cell problem {j} incompatible: constant-mode load {compat:.3e}")
        x = fem.solve_spd(A, Fr[keep], rel_tol=rel_tol, max_iter=max_iter)
        lr = np.zeros(n_red)
        lr[keep] = x
        l = lr[inv]
        l -= ones @ (M @ l) / total
        fields.append(l)
        grads.append(fem.gradient_per_triangle(cell_mesh, l))

    porosity = cell_mesh.total_area
    has_iface = bool(np.any(cell_mesh.edge_kind == msh.INTERFACE))
    gamma = cell_mesh.boundary_length(msh.INTERFACE) if has_iface else 0.0
    sol = CellSolution(
        mesh=cell_mesh,
        l1=fem.NodalField(cell_mesh, fields[0]).validate(),
        l2=fem.NodalField(cell_mesh, fields[1]).validate(),
        grad_l1=grads[0], grad_l2=grads[1],
        porosity=porosity, interface_measure=gamma)
    return sol.validate()


def effective_tensor(sol, D):
    """Effective diffusion matrix for diffusion coefficient D.

    Evaluates ``(D/|Y^p|) * int (delta_ij + d l_j/d y_i)`` with one-point
    quadrature (exact here), symmetrizes, and keeps the asymmetry residual
    as a mesh-quality diagnostic.
    """
    if D <= 0:
        raise ValidationError(f"diffusion coefficient must be positive, got {D}")
    raw = sol.base_tensor()
    asym = abs(raw[0, 1] - raw[1, 0])
    symmetric = 0.5 * (raw + raw.T)
    return EffectiveTensor(matrix=D * symmetric, asymmetry=D * asym,
                           diffusion=D).validate(sym_tol=1e-9)


def corrector_at(sol, y):
    """Corrector matrix at a point (or points) of the unit cell.

    Accepts a single (2,) point or an (n, 2) array; raises
    InterpolationError when a point falls inside the inclusion.  Callers
    evaluating the oscillating corrector C^eps(x) pass y = (x/eps) mod 1.
    """
    pts = np.atleast_2d(np.asarray(y, dtype=float))
    tri, _ = sol.mesh.locator.locate(pts)
    if np.any(tri < 0):
        bad = pts[tri < 0][0]
        raise InterpolationError(
            f"cell point ({bad[0]}, {bad[1]}) lies inside the inclusion")
    C = sol.corrector_per_triangle()[tri]
    if np.ndim(y) == 1:
        return C[0]
    return C
