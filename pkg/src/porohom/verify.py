"""Quantitative comparison of the pore-scale and homogenized runs.

Implements the corrector norms (sup-in-time L2 distances of the species,
the space-time norm of the corrector-adjusted gradient mismatch, the scaled
interface norm of the precipitate), the two energy forms with their
consistency gap, the initial-data compatibility table, and the epsilon
sweep that stacks all of it into one report per scale.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from . import fem
from . import mesh as msh
from .cell import corrector_at
from .errors import ValidationError
from .macro import HomogenizedCoefficients, run_macro
from .micro import run_micro

#: fixed column order of norms.csv / report rows
NORM_FIELDS = ("epsilon", "norm_u_C_L2", "norm_grad_u", "norm_v_C_L2",
               "norm_grad_v", "norm_w_C_L2", "energy_sup_diff",
               "wall_time_micro", "wall_time_macro")


@dataclass
class NormReport:
    """One row of the convergence table."""

    epsilon: float
    norm_u_C_L2: float
    norm_grad_u: float
    norm_v_C_L2: float
    norm_grad_v: float
    norm_w_C_L2: float
    energy_sup_diff: float
    wall_time_micro: float
    wall_time_macro: float

    def validate(self):
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        for f in fields(self):
            val = getattr(self, f.name)
            if not np.isfinite(val) or (f.name.startswith("norm") and val < 0):
                raise ValidationError(f"{f.name} = {val} invalid")
        return self

    def as_row(self):
        return [getattr(self, name) for name in NORM_FIELDS]


def micro_energy(trace):
    """Both energy series of a pore-scale run: (times, quadratic, flux)."""
    return trace.times, trace.series["energy_quadratic"], \
        trace.series["energy_flux"]


def macro_energy(trace):
    """Both energy series of a homogenized run (porosity weights included)."""
    return trace.times, trace.series["energy_quadratic"], \
        trace.series["energy_flux"]


def energy_consistency(trace):
    """Largest relative gap between the two energy forms over all steps."""
    e_quad = trace.series["energy_quadratic"]
    e_flux = trace.series["energy_flux"]
    scale = np.maximum(np.abs(e_quad), 1e-300)
    return float(np.max(np.abs(e_quad - e_flux) / scale))


def _aligned_samples(micro_trace, macro_trace, tol=1e-12):
    mics = micro_trace.snapshots
    macs = macro_trace.snapshots
    if len(mics) != len(macs):
        raise ValidationError(
            f"runs sampled differently: {len(mics)} vs {len(macs)} snapshots")
    tm = np.array([s.t for s in mics])
    tM = np.array([s.t for s in macs])
    if np.max(np.abs(tm - tM)) > tol:
        raise ValidationError("sample times of the two runs do not match")
    return tm


def corrector_norms(micro_trace, macro_trace, cell_sol, params):
    """Evaluate the five convergence norms for one epsilon.

    The macro fields are interpolated onto the pore mesh per sample; the
    macro gradient is evaluated at each pore-triangle barycenter and
    multiplied by the corrector matrix of the corresponding cell point
    before being differenced against the pore-scale gradient.  Sup-in-time
    norms maximize over the stored samples, the space-time gradient norm
    uses the trapezoidal rule on them.
    """
    mm = micro_trace.mesh
    Mm = macro_trace.mesh
    eps = params.epsilon
    ts = _aligned_samples(micro_trace, macro_trace)

    M_micro = fem.assemble_mass(mm)
    iface = mm.interface_vertices()
    has_iface = len(iface) > 0
    if has_iface:
        Mg = fem.assemble_interface_mass(mm, msh.INTERFACE, lumped=False)

    tri_v, bary_v = Mm.locator.locate(mm.vertices)
    if np.any(tri_v < 0):
        raise ValidationError("a pore vertex fell outside the macro mesh")
    nodes_v = Mm.triangles[tri_v]

    bary_c = mm.vertices[mm.triangles].mean(axis=1)
    tri_b, _ = Mm.locator.locate(bary_c)
    if np.any(tri_b < 0):
        raise ValidationError("a pore barycenter fell outside the macro mesh")

    dom = mm.meta.get("domain", (0.0, 0.0, 0.0, 0.0))
    origin = np.array([dom[0], dom[2]])
    y_cell = np.mod((bary_c - origin) / eps, 1.0)
    C = corrector_at(cell_sol, y_cell)

    area = mm.element_areas
    sup_u = sup_v = sup_w = 0.0
    grad_u_sq = np.empty(len(ts))
    grad_v_sq = np.empty(len(ts))

    for i, (snap_m, snap_M) in enumerate(zip(micro_trace.snapshots,
                                             macro_trace.snapshots)):
        for which, key in (("u", "u"), ("v", "v")):
            f_micro = snap_m.fields[key]
            f_macro = snap_M.fields[key]
            f0 = np.einsum("pk,pk->p", f_macro[nodes_v], bary_v)
            d = f_micro - f0
            val = float(np.sqrt(max(d @ (M_micro @ d), 0.0)))
            g_micro = np.einsum("tik,tk->ti", mm.grad_ops,
                                f_micro[mm.triangles])
            g_macro = fem.gradient_per_triangle(Mm, f_macro)[tri_b]
            g_diff = g_micro - np.einsum("tij,tj->ti", C, g_macro)
            sq = float(area @ (g_diff ** 2).sum(axis=1))
            if which == "u":
                sup_u = max(sup_u, val)
                grad_u_sq[i] = sq
            else:
                sup_v = max(sup_v, val)
                grad_v_sq[i] = sq
        if has_iface:
            w_micro = snap_m.fields["w"]
            w_macro = snap_M.fields["w"]
            w0 = np.einsum("pk,pk->p", w_macro[nodes_v[iface]], bary_v[iface])
            d_full = np.zeros(mm.n_vertices)
            d_full[iface] = w_micro - w0
            sup_w = max(sup_w, float(
                np.sqrt(max(eps * (d_full @ (Mg @ d_full)), 0.0))))

    norm_grad_u = float(np.sqrt(max(np.trapezoid(grad_u_sq, ts), 0.0)))
    norm_grad_v = float(np.sqrt(max(np.trapezoid(grad_v_sq, ts), 0.0)))

    e_m = micro_trace.series["energy_quadratic"]
    e_M = macro_trace.series["energy_quadratic"]
    if len(e_m) != len(e_M) or \
            np.max(np.abs(micro_trace.times - macro_trace.times)) > 1e-12:
        raise ValidationError("step times of the two runs do not match")
    energy_sup = float(np.max(np.abs(e_m - e_M)))

    return NormReport(
        epsilon=eps, norm_u_C_L2=sup_u, norm_grad_u=norm_grad_u,
        norm_v_C_L2=sup_v, norm_grad_v=norm_grad_v, norm_w_C_L2=sup_w,
        energy_sup_diff=energy_sup,
        wall_time_micro=micro_trace.wall_time,
        wall_time_macro=macro_trace.wall_time).validate()


def initial_compatibility(eps_list, w_fn, cell_sol, domain, template,
                          macro_mesh):
    """Table of the scaled interface integrals of the initial precipitate.

    For each epsilon the left side ``eps * int_{interfaces} w^2`` is
    evaluated with the 1D interface mass matrix on the tiled mesh; the
    limit is ``|Gamma| * int_domain w^2`` via the macro mass matrix (the
    precipitate data do not depend on the cell variable).
    """
    values = []
    for eps in eps_list:
        mesh = msh.build_perforated_mesh(domain, eps, template)
        Mg = fem.assemble_interface_mass(mesh, msh.INTERFACE, lumped=False)
        wv = np.zeros(mesh.n_vertices)
        ids = mesh.interface_vertices()
        wv[ids] = w_fn(mesh.vertices[ids, 0], mesh.vertices[ids, 1])
        values.append(float(eps * (wv @ (Mg @ wv))))
    Mmac = fem.assemble_mass(macro_mesh)
    wm = np.asarray(w_fn(macro_mesh.vertices[:, 0], macro_mesh.vertices[:, 1]),
                    dtype=float)
    if np.ndim(wm) == 0:
        wm = np.full(macro_mesh.n_vertices, float(wm))
    limit = float(cell_sol.interface_measure * (wm @ (Mmac @ wm)))
    return {"epsilons": list(eps_list), "values": values, "limit": limit}


def convergence_study(domain, template, cell_sol, macro_mesh, params,
                      eps_list, trace_req=None, initials=None,
                      rel_tol=1e-12, max_iter=20000, on_row=None):
    """Run the epsilon sweep against one shared macro reference.

    The macro run and the cell solution are computed once and reused for
    every epsilon.  Completed rows are handed to ``on_row`` as they finish
    so partial results survive a failure in a later epsilon.

    Returns (reports, artifacts) where artifacts carries the macro trace
    and the per-epsilon scalar series (snapshots dropped to bound memory).
    """
    if not eps_list:
        raise ValidationError("empty epsilon list")
    coeffs = HomogenizedCoefficients.from_cell_solution(cell_sol, params)
    macro_trace = run_macro(macro_mesh, params, coeffs, trace_req=trace_req,
                            initials=initials, rel_tol=rel_tol,
                            max_iter=max_iter)
    reports = []
    per_eps = {}
    for eps in eps_list:
        p = replace(params, epsilon=eps)
        mesh = msh.build_perforated_mesh(domain, eps, template)
        micro_trace = run_micro(mesh, p, trace_req=trace_req,
                                initials=initials, rel_tol=rel_tol,
                                max_iter=max_iter)
        report = corrector_norms(micro_trace, macro_trace, cell_sol, p)
        reports.append(report)
        per_eps[eps] = {
            "times": micro_trace.times,
            "series": micro_trace.series,
            "energy_consistency": energy_consistency(micro_trace),
            "meta": micro_trace.meta,
        }
        if on_row is not None:
            on_row(report)
    artifacts = {"macro_trace": macro_trace, "per_eps": per_eps,
                 "coeffs": coeffs,
                 "macro_energy_consistency": energy_consistency(macro_trace)}
    return reports, artifacts
