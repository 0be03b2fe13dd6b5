"""Implementation of the CLI subcommands: build the requested artifacts
from a RunConfig and write everything through a managed output directory.
"""

from __future__ import annotations

import time
from types import SimpleNamespace

import numpy as np

from . import io, mesh as msh, plots, verify
from .cell import effective_tensor, solve_cell_problems
from .config import RunConfig
from .errors import ConfigError
from .macro import HomogenizedCoefficients, run_macro
from .micro import TraceRequest, run_micro


def _trace_request(cfg):
    return TraceRequest(points=cfg.run.trace_points, store_fields=True,
                        burst_T=cfg.run.burst_T,
                        burst_stride=cfg.run.burst_stride)


def build_template(cfg, h=None):
    g = cfg.geometry
    return msh.build_unit_cell_mesh(g.radius, g.n_gamma,
                                    h if h is not None else g.h_micro,
                                    no_inclusion=g.no_inclusion)


def _mesh_stats(mesh):
    stats = {"n_vertices": mesh.n_vertices, "n_triangles": mesh.n_triangles,
             "n_boundary_edges": len(mesh.boundary_edges),
             "area": mesh.total_area}
    if np.any(mesh.edge_kind == msh.INTERFACE):
        stats["interface_length"] = mesh.boundary_length(msh.INTERFACE)
    for key in ("epsilon", "n_cells", "radius", "n_gamma", "h", "domain"):
        if key in mesh.meta:
            stats[key] = mesh.meta[key]
    return stats


def cmd_mesh(cfg, outdir):
    """Generate and export the template, perforated and macro meshes."""
    out = io.OutputDir(outdir)
    template = build_template(cfg)
    perforated = msh.build_perforated_mesh(cfg.geometry.domain,
                                           cfg.geometry.epsilon, template)
    macro = msh.build_macro_mesh(cfg.geometry.domain, cfg.geometry.h_macro)
    out.write_vtk_mesh("template.vtk", template)
    out.write_vtk_mesh("perforated.vtk", perforated)
    out.write_vtk_mesh("macro.vtk", macro)
    stats = {"template": _mesh_stats(template),
             "perforated": _mesh_stats(perforated),
             "macro": _mesh_stats(macro)}
    out.write_json("mesh_stats.json", stats)
    out.write_manifest()
    return stats


def cmd_cell(cfg, outdir):
    """Solve the cell problems and export tensors and potentials."""
    out = io.OutputDir(outdir)
    t0 = time.perf_counter()
    template = build_template(cfg, h=cfg.geometry.h_cell)
    sol = solve_cell_problems(template, rel_tol=cfg.solver.rel_tol,
                              max_iter=cfg.solver.max_iter)
    A = effective_tensor(sol, cfg.params.D1)
    B = effective_tensor(sol, cfg.params.D2)
    wall = time.perf_counter() - t0
    report = {
        "porosity": sol.porosity,
        "interface_measure": sol.interface_measure,
        "A": A.matrix.tolist(),
        "B": B.matrix.tolist(),
        "asymmetry": {"A": A.asymmetry, "B": B.asymmetry},
        "radius": cfg.geometry.radius,
        "n_gamma": cfg.geometry.n_gamma,
        "h": cfg.geometry.h_cell,
        "no_inclusion": cfg.geometry.no_inclusion,
        "wall_time": wall,
    }
    out.write_json("cell_report.json", report)
    out.write_vtk_fields("cell_fields.vtk", sol.mesh,
                         {"l1": sol.l1.values, "l2": sol.l2.values})
    out.write_manifest()
    return report


def _write_run_outputs(out, trace, prefix, cfg):
    header, columns = io.trace_csv_columns(trace)
    out.write_csv(f"{prefix}_trace.csv", header, columns)
    mesh = trace.mesh
    for k, snap in enumerate(trace.regular_snapshots()):
        point_data = {}
        for name, values in snap.fields.items():
            if len(values) == mesh.n_vertices:
                point_data[name] = values
            else:
                point_data[name] = io.surface_to_full(
                    mesh, values, mesh.interface_vertices())
        out.write_vtk_fields(f"{prefix}_{k:04d}.vtk", mesh, point_data)
    if cfg.run.trace_points:
        fig = plots.single_trace_figure(trace, cfg.run.trace_points[0])
        out.save_figure(f"{prefix}_trace.svg", fig)
        plots.close(fig)
    summary = dict(trace.meta)
    summary["wall_time"] = trace.wall_time
    summary["energy_consistency"] = verify.energy_consistency(trace)
    for name in ("mass_u", "mass_v", "mass_w", "mass_u0", "mass_v0",
                 "mass_w0"):
        if name in trace.series:
            summary[f"final_{name}"] = float(trace.series[name][-1])
    out.write_json(f"{prefix}_summary.json", summary)
    return summary


def cmd_micro(cfg, outdir):
    """Run the pore-scale system with the configured epsilon."""
    out = io.OutputDir(outdir)
    template = build_template(cfg)
    mesh = msh.build_perforated_mesh(cfg.geometry.domain,
                                     cfg.geometry.epsilon, template)
    trace = run_micro(mesh, cfg.model_params(), _trace_request(cfg),
                      initials=cfg.initial_functions(),
                      rel_tol=cfg.solver.rel_tol,
                      max_iter=cfg.solver.max_iter)
    summary = _write_run_outputs(out, trace, "micro", cfg)
    out.write_manifest()
    return summary


def _load_coeffs(cfg, cell_report=None, tensor_a=None, tensor_b=None,
                 porosity=None, interface_measure=None):
    if tensor_a is not None:
        if porosity is None or interface_measure is None or tensor_b is None:
            raise ConfigError("inline tensor override needs --tensor-a, "
                              "--tensor-b, --porosity and --interface-measure")
        def mat(t):
            a11, a12, a22 = t
            return np.array([[a11, a12], [a12, a22]])
        return HomogenizedCoefficients(A=mat(tensor_a), B=mat(tensor_b),
                                       porosity=porosity,
                                       interface_measure=interface_measure)
    if cell_report is not None:
        import json
        with open(cell_report, "r", encoding="utf-8") as fh:
            rep = json.load(fh)
        return HomogenizedCoefficients(
            A=np.array(rep["A"]), B=np.array(rep["B"]),
            porosity=rep["porosity"],
            interface_measure=rep["interface_measure"])
    template = build_template(cfg, h=cfg.geometry.h_cell)
    sol = solve_cell_problems(template, rel_tol=cfg.solver.rel_tol,
                              max_iter=cfg.solver.max_iter)
    return HomogenizedCoefficients.from_cell_solution(sol, cfg.model_params())


def cmd_macro(cfg, outdir, cell_report=None, tensor_a=None, tensor_b=None,
              porosity=None, interface_measure=None):
    """Run the homogenized system (tensors from a cell report or inline)."""
    out = io.OutputDir(outdir)
    coeffs = _load_coeffs(cfg, cell_report, tensor_a, tensor_b,
                          porosity, interface_measure)
    mesh = msh.build_macro_mesh(cfg.geometry.domain, cfg.geometry.h_macro)
    trace = run_macro(mesh, cfg.model_params(), coeffs, _trace_request(cfg),
                      initials=cfg.initial_functions(),
                      rel_tol=cfg.solver.rel_tol,
                      max_iter=cfg.solver.max_iter)
    summary = _write_run_outputs(out, trace, "macro", cfg)
    summary["A"] = np.asarray(coeffs.A).tolist()
    summary["B"] = np.asarray(coeffs.B).tolist()
    out.write_json("macro_coefficients.json",
                   {"A": np.asarray(coeffs.A).tolist(),
                    "B": np.asarray(coeffs.B).tolist(),
                    "porosity": coeffs.porosity,
                    "interface_measure": coeffs.interface_measure})
    out.write_manifest()
    return summary


def _report_row(report):
    return {name: getattr(report, name) for name in verify.NORM_FIELDS}


def _converge_core(cfg, outdir, eps_list):
    out = io.OutputDir(outdir)
    template = build_template(cfg)
    cell_mesh = build_template(cfg, h=cfg.geometry.h_cell)
    cell_sol = solve_cell_problems(cell_mesh, rel_tol=cfg.solver.rel_tol,
                                   max_iter=cfg.solver.max_iter)
    macro_mesh = msh.build_macro_mesh(cfg.geometry.domain,
                                      cfg.geometry.h_macro)
    rows_done = []

    def flush(report):
        rows_done.append(report)
        out.write_csv("norms.csv", verify.NORM_FIELDS,
                      list(zip(*[r.as_row() for r in rows_done])))
        print(f"  eps={report.epsilon:g}: |u-u0|={report.norm_u_C_L2:.4e} "
              f"|grad u - C grad u0|={report.norm_grad_u:.4e} "
              f"|w-w0|={report.norm_w_C_L2:.4e}")

    reports, artifacts = verify.convergence_study(
        cfg.geometry.domain, template, cell_sol, macro_mesh,
        cfg.model_params(), eps_list, trace_req=_trace_request(cfg),
        initials=cfg.initial_functions(), rel_tol=cfg.solver.rel_tol,
        max_iter=cfg.solver.max_iter, on_row=flush)

    macro_trace = artifacts["macro_trace"]
    for eps in eps_list:
        data = artifacts["per_eps"][eps]
        out.write_csv(
            f"energies_{eps:g}.csv",
            ["time", "E_micro_quadratic", "E_micro_flux",
             "E_macro_quadratic", "E_macro_flux"],
            [data["times"], data["series"]["energy_quadratic"],
             data["series"]["energy_flux"],
             macro_trace.series["energy_quadratic"],
             macro_trace.series["energy_flux"]])

    compat = verify.initial_compatibility(
        eps_list, cfg.initials.w, cell_sol, cfg.geometry.domain, template,
        macro_mesh)
    compat_const = verify.initial_compatibility(
        eps_list, lambda x, y: np.ones_like(np.asarray(x, dtype=float)),
        cell_sol, cfg.geometry.domain, template, macro_mesh)

    A = effective_tensor(cell_sol, cfg.params.D1)
    B = effective_tensor(cell_sol, cfg.params.D2)
    base = reports[0]
    report_json = {
        "rows": [_report_row(r) for r in reports],
        "wall_time_ratio": base.wall_time_macro / base.wall_time_micro,
        "tensors": {"A": A.matrix.tolist(), "B": B.matrix.tolist(),
                    "asymmetry": {"A": A.asymmetry, "B": B.asymmetry}},
        "porosity": cell_sol.porosity,
        "interface_measure": cell_sol.interface_measure,
        "initial_compatibility": compat,
        "initial_compatibility_const": compat_const,
        "energy_consistency": {
            "macro": artifacts["macro_energy_consistency"],
            **{f"micro_{eps:g}": artifacts["per_eps"][eps]["energy_consistency"]
               for eps in eps_list}},
    }
    out.write_json("report.json", report_json)

    for eps in eps_list:
        data = artifacts["per_eps"][eps]
        lean = SimpleNamespace(times=data["times"], series=data["series"])
        fig = plots.energy_figure(lean, macro_trace)
        out.save_figure(f"energies_{eps:g}.svg", fig)
        plots.close(fig)
        if cfg.run.trace_points:
            fig = plots.trace_figure(lean, macro_trace,
                                     cfg.run.trace_points[0])
            out.save_figure(f"trace_{eps:g}.svg", fig)
            plots.close(fig)
    if len(reports) > 1:
        fig = plots.norms_figure(reports)
        out.save_figure("norms.svg", fig)
        plots.close(fig)

    out.write_manifest()
    return report_json


def cmd_verify(cfg, outdir):
    """Single-epsilon verification: norms, energies, figures, report."""
    return _converge_core(cfg, outdir, [cfg.geometry.epsilon])


def cmd_converge(cfg, outdir, eps_list=None):
    """Epsilon sweep against one shared macro reference."""
    eps = list(eps_list) if eps_list else list(cfg.sweep.eps_list)
    return _converge_core(cfg, outdir, eps)
