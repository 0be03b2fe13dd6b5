"""P1 finite-element assembly, a Jacobi-preconditioned CG solver, quadrature
norms and cross-mesh interpolation.

Matrices are scipy CSR; all bilinear forms here are exact for piecewise-linear
fields (degree-2 integrands at most), so low-order quadrature is exact.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from dataclasses import dataclass, field

from . import mesh as msh
from .errors import InterpolationError, SolverConvergenceError, ValidationError

#: local consistent P1 mass matrix on the reference triangle, times 12/area
_LOCAL_MASS = np.array([[2.0, 1.0, 1.0],
                        [1.0, 2.0, 1.0],
                        [1.0, 1.0, 2.0]]) / 12.0


@dataclass
class NodalField:
    """Scalar field attached to mesh vertices.

    ``kind`` is "volume" (one value per vertex) or "surface" (one value per
    interface vertex, with ``vertex_ids`` giving the vertex indices).
    """

    mesh: object
    values: np.ndarray
    kind: str = "volume"
    vertex_ids: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def validate(self):
        if self.kind == "volume":
            if len(self.values) != self.mesh.n_vertices:
                raise ValidationError(
                    f"volume field has {len(self.values)} values for "
                    f"{self.mesh.n_vertices} vertices")
        elif self.kind == "surface":
            ids = self.vertex_ids if self.vertex_ids is not None \
                else self.mesh.interface_vertices()
            if len(self.values) != len(ids):
                raise ValidationError(
                    f"surface field has {len(self.values)} values for "
                    f"{len(ids)} interface vertices")
        else:
            raise ValidationError(f"unknown field kind {self.kind!r}")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("field contains non-finite values")
        return self


def _scatter(mesh, local):
    """COO-accumulate per-element 3x3 blocks into a CSR matrix."""
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    out = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    out.sum_duplicates()
    return out


def assemble_mass(mesh):
    """Consistent P1 mass matrix (symmetric positive-definite)."""
    local = mesh.element_areas[:, None, None] * _LOCAL_MASS[None, :, :]
    return _scatter(mesh, local)


def assemble_stiffness(mesh, tensor):
    """Stiffness matrix for a constant or per-element SPD 2x2 tensor.

    Constants lie in the kernel; the result is symmetric positive
    semi-definite.
    """
    tensor = np.asarray(tensor, dtype=float)
    if tensor.ndim == 2:
        tensor = np.broadcast_to(tensor, (mesh.n_triangles, 2, 2))
    if tensor.shape != (mesh.n_triangles, 2, 2):
        raise ValidationError(f"tensor shape {tensor.shape} not (2,2) or (M,2,2)")
    sym = np.abs(tensor[:, 0, 1] - tensor[:, 1, 0]) \
        <= 1e-12 * (1.0 + np.abs(tensor).max())
    pd = (tensor[:, 0, 0] > 0) & \
         (tensor[:, 0, 0] * tensor[:, 1, 1] - tensor[:, 0, 1] * tensor[:, 1, 0] > 0)
    if not (np.all(sym) and np.all(pd)):
        raise ValidationError("diffusion tensor must be symmetric positive-definite")
    g = mesh.grad_ops
    local = np.einsum("tik,tij,tjl,t->tkl", g, tensor, g, mesh.element_areas)
    return _scatter(mesh, local)


def assemble_interface_mass(mesh, kind=msh.INTERFACE, lumped=False):
    """1D P1 mass matrix over the boundary edges carrying ``kind``.

    The result lives on the full vertex index set with entries only on the
    tagged edges.  ``lumped=True`` row-lumps (row sums are preserved).  Any
    epsilon scaling of the surface measure is the caller's business.
    """
    sel = mesh.edge_kind == kind
    if not np.any(sel):
        raise ValidationError(
            f"mesh has no boundary edges tagged {msh._KIND_NAMES.get(kind, kind)}")
    edges = mesh.boundary_edges[sel]
    lengths = mesh.edge_lengths(kind)
    n = mesh.n_vertices
    if lumped:
        diag = np.zeros(n)
        np.add.at(diag, edges[:, 0], lengths / 2.0)
        np.add.at(diag, edges[:, 1], lengths / 2.0)
        return sp.diags(diag).tocsr()
    i = np.concatenate([edges[:, 0], edges[:, 1], edges[:, 0], edges[:, 1]])
    j = np.concatenate([edges[:, 0], edges[:, 1], edges[:, 1], edges[:, 0]])
    vals = np.concatenate([lengths / 3.0, lengths / 3.0,
                           lengths / 6.0, lengths / 6.0])
    out = sp.coo_matrix((vals, (i, j)), shape=(n, n)).tocsr()
    out.sum_duplicates()
    return out


def check_symmetric(A, rel_tol=1e-14):
    """True when A equals its transpose to a relative tolerance."""
    d = A - A.T
    if d.nnz == 0:
        return True
    scale = np.abs(A.data).max() if A.nnz else 1.0
    return np.abs(d.data).max() <= rel_tol * scale


def solve_spd(A, b, rel_tol=1e-10, max_iter=20000, x0=None):
    """Conjugate gradients with Jacobi preconditioning.

    Solves A x = b for symmetric positive-definite A to
    ``||Ax - b|| <= rel_tol * ||b||``.  Deterministic; raises
    SolverConvergenceError carrying the final residual on failure.
    """
    b = np.asarray(b, dtype=float)
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros_like(b)
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise ValidationError("matrix has non-positive diagonal entries; not SPD")
    inv_diag = 1.0 / diag
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    target = rel_tol * norm_b
    res = np.linalg.norm(r)
    if res <= target:
        return x
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    for _ in range(max_iter):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r)
        if res <= target:
            return x
        z = inv_diag * r
        rz_new = r @ z
        p *= rz_new / rz
        p += z
        rz = rz_new
    raise SolverConvergenceError(
        f"CG did not reach {rel_tol:g} within {max_iter} iterations "
        f"(residual {res / norm_b:.3e} relative)",
        residual=float(res), iterations=max_iter)


def gradient_per_triangle(mesh, values):
    """Piecewise-constant P1 gradients, shape (M, 2)."""
    return np.einsum("tik,tk->ti", mesh.grad_ops,
                     np.asarray(values)[mesh.triangles])


def l2_volume(mesh, values):
    """Exact L2 norm of a P1 volume field."""
    f = np.asarray(values)[mesh.triangles]
    q = np.einsum("ti,ij,tj->t", f, _LOCAL_MASS, f)
    return float(np.sqrt(np.maximum(q * mesh.element_areas, 0.0).sum()))


def l2_gradient(mesh, values):
    """L2 norm of the piecewise-constant gradient of a P1 field."""
    g = gradient_per_triangle(mesh, values)
    return float(np.sqrt((mesh.element_areas * (g ** 2).sum(axis=1)).sum()))


def l2_surface(mesh, values, kind=msh.INTERFACE):
    """L2 norm over tagged boundary edges (no epsilon factor applied)."""
    sel = mesh.edge_kind == kind
    if not np.any(sel):
        raise ValidationError("mesh has no edges with the requested tag")
    edges = mesh.boundary_edges[sel]
    lengths = mesh.edge_lengths(kind)
    v = np.asarray(values)
    a = v[edges[:, 0]]
    b = v[edges[:, 1]]
    q = lengths / 6.0 * (2 * a * a + 2 * a * b + 2 * b * b)
    return float(np.sqrt(np.maximum(q, 0.0).sum()))


def field_norms(mesh, f, g=None, kind="volume", tag=msh.INTERFACE):
    """Norms of a field (or of the difference of a pair).

    Volume fields get ``l2_volume`` and ``l2_gradient``; surface fields get
    ``l2_surface`` over the tagged edges.  Surface values must be given on
    the full vertex set here (zero off the boundary is fine).
    """
    f = np.asarray(f, dtype=float)
    if g is not None:
        g = np.asarray(g, dtype=float)
        if g.shape != f.shape:
            raise ValidationError("field pair shapes differ")
        f = f - g
    if kind == "volume":
        if len(f) != mesh.n_vertices:
            raise ValidationError("volume field length does not match the mesh")
        return {"l2_volume": l2_volume(mesh, f),
                "l2_gradient": l2_gradient(mesh, f)}
    if kind == "surface":
        if len(f) != mesh.n_vertices:
            raise ValidationError(
                "surface norm expects values on the full vertex set")
        return {"l2_surface": l2_surface(mesh, f, tag)}
    raise ValidationError(f"unknown field kind {kind!r}")


def interpolate(src_mesh, values, points, policy="error"):
    """Evaluate a P1 field at arbitrary points by barycentric interpolation.

    ``policy`` controls misses (a point in a hole or outside the domain):
    "error" raises InterpolationError, "nearest" falls back to the nearest
    vertex value.
    """
    values = np.asarray(values, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    tri, bary = src_mesh.locator.locate(pts)
    out = np.empty(len(pts))
    hit = tri >= 0
    if np.any(hit):
        nodes = src_mesh.triangles[tri[hit]]
        out[hit] = np.einsum("pk,pk->p", values[nodes], bary[hit])
    if np.any(~hit):
        if policy == "error":
            bad = pts[~hit][0]
            raise InterpolationError(
                f"point ({bad[0]}, {bad[1]}) not inside the source mesh")
        if policy != "nearest":
            raise ValidationError(f"unknown interpolation policy {policy!r}")
        miss = np.where(~hit)[0]
        d = pts[miss, None, :] - src_mesh.vertices[None, :, :]
        nearest = np.argmin((d ** 2).sum(axis=2), axis=1)
        out[miss] = values[nearest]
    if np.isscalar(points[0]) and np.ndim(points) == 1:
        return float(out[0])
    return out


def interpolate_gradient(src_mesh, values, points, policy="error"):
    """Piecewise-constant gradient of a P1 field at arbitrary points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    tri, _ = src_mesh.locator.locate(pts)
    if np.any(tri < 0):
        if policy == "error":
            bad = pts[tri < 0][0]
            raise InterpolationError(
                f"point ({bad[0]}, {bad[1]}) not inside the source mesh")
        raise ValidationError(f"unknown interpolation policy {policy!r}")
    g = gradient_per_triangle(src_mesh, values)
    return g[tri]
