"""Time stepper for the homogenized system on the unperforated rectangle.

The structure mirrors the pore-scale stepper: the precipitate ODE advances
per vertex with the same semi-implicit rule, its increment defines the
distributed exchange term ``P = (|Gamma|/|Y^p|) dw/dt`` (the interface
integral collapses to the factor |Gamma| because the precipitate data are
independent of the cell variable), and both species take implicit-Euler
diffusion steps with the effective tensors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import fem
from .cell import effective_tensor
from .errors import InterpolationError, ValidationError
from .kinetics import psi_reg, reaction_rate, step_precipitate
from .micro import Snapshot, Trace, TraceRequest, _point_samplers, \
    _sample_plan, point_key


@dataclass
class HomogenizedCoefficients:
    """Effective tensors and cell measures feeding the macro system."""

    A: np.ndarray
    B: np.ndarray
    porosity: float
    interface_measure: float

    @classmethod
    def from_cell_solution(cls, sol, params):
        return cls(A=effective_tensor(sol, params.D1).matrix,
                   B=effective_tensor(sol, params.D2).matrix,
                   porosity=sol.porosity,
                   interface_measure=sol.interface_measure)

    @property
    def coupling(self):
        return self.interface_measure / self.porosity

    def validate(self):
        if not (0.0 < self.porosity <= 1.0):
            raise ValidationError(f"porosity {self.porosity} outside (0, 1]")
        if self.interface_measure < 0.0:
            raise ValidationError("negative interface measure")
        for name, m in (("A", self.A), ("B", self.B)):
            m = np.asarray(m, dtype=float)
            if m.shape != (2, 2) or abs(m[0, 1] - m[1, 0]) > 1e-9 * abs(m).max():
                raise ValidationError(f"effective tensor {name} not symmetric 2x2")
        return self


@dataclass
class MacroState:
    """Nodal fields of the homogenized system at one time."""

    t: float
    u0: fem.NodalField
    v0: fem.NodalField
    w0: fem.NodalField
    z0: fem.NodalField

    def validate(self, tol=1e-12):
        for f in (self.u0, self.v0, self.w0, self.z0):
            f.validate()
        for name, f in (("u0", self.u0), ("v0", self.v0), ("w0", self.w0)):
            if f.values.min() < -tol:
                raise ValidationError(
                    f"{name} dips to {f.values.min():.3e}, below -{tol:g}")
        if self.z0.values.min() < 0.0 or self.z0.values.max() > 1.0:
            raise ValidationError("z0 leaves [0, 1]")
        return self


class MacroOperators:
    """Matrices assembled once per (mesh, coefficients) pair."""

    def __init__(self, mesh, params, coeffs, rel_tol=1e-12, max_iter=20000):
        coeffs.validate()
        self.mesh = mesh
        self.params = params
        self.coeffs = coeffs
        self.M = fem.assemble_mass(mesh)
        self.K_A = fem.assemble_stiffness(mesh, np.asarray(coeffs.A))
        self.K_B = fem.assemble_stiffness(mesh, np.asarray(coeffs.B))
        self.A_u = (self.M + params.dt * self.K_A).tocsr()
        self.A_v = (self.M + params.dt * self.K_B).tocsr()
        self.mass_vec = self.M @ np.ones(mesh.n_vertices)
        self.rel_tol = rel_tol
        self.max_iter = max_iter

    def solve(self, A, b, x0):
        return fem.solve_spd(A, b, rel_tol=self.rel_tol,
                             max_iter=self.max_iter, x0=x0)


def init_macro(mesh, initials, params, coeffs):
    """Nodal initial data for the homogenized system (rejects negatives)."""
    coeffs.validate()
    x = mesh.vertices[:, 0]
    y = mesh.vertices[:, 1]
    u0 = np.asarray(initials["u"](x, y), dtype=float)
    v0 = np.asarray(initials["v"](x, y), dtype=float)
    w0 = np.asarray(initials["w"](x, y), dtype=float)
    for name, vals in (("u", u0), ("v", v0), ("w", w0)):
        if vals.min() < 0.0:
            raise ValidationError(
                f"initial {name} is negative (min {vals.min():.3e}); "
                f"nonnegative initial data required")
    return MacroState(
        t=0.0,
        u0=fem.NodalField(mesh, u0, "volume"),
        v0=fem.NodalField(mesh, v0, "volume"),
        w0=fem.NodalField(mesh, w0, "volume"),
        z0=fem.NodalField(mesh, psi_reg(w0, params.delta), "volume"),
    ).validate()


def step_macro(state, params, ops, guess=None):
    """Advance one time step; returns a new MacroState."""
    mesh = ops.mesh
    u0 = state.u0.values
    v0 = state.v0.values
    w0 = state.w0.values
    dt = params.dt
    frozen = ops.coeffs.interface_measure == 0.0

    if frozen:
        w_new = w0
        P = np.zeros_like(w0)
    else:
        rate = reaction_rate(u0, v0, params)
        w_new = step_precipitate(w0, rate, params)
        P = ops.coeffs.coupling * (w_new - w0) / dt

    b_u = ops.M @ u0 - dt * (ops.M @ P)
    b_v = ops.M @ v0 - dt * (ops.M @ P)
    x0_u, x0_v = guess if guess is not None else (u0, v0)
    u_new = ops.solve(ops.A_u, b_u, x0=x0_u)
    v_new = ops.solve(ops.A_v, b_v, x0=x0_v)
    z_new = state.z0.values if frozen else psi_reg(w_new, params.delta)

    t_new = state.t + dt
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))
            and np.all(np.isfinite(w_new))):
        raise ValidationError(
            f"NaN/Inf at t={t_new:.6g}: "
            f"u0 in [{np.nanmin(u_new):.3e}, {np.nanmax(u_new):.3e}], "
            f"v0 in [{np.nanmin(v_new):.3e}, {np.nanmax(v_new):.3e}]")
    return MacroState(
        t=t_new,
        u0=fem.NodalField(mesh, u_new, "volume"),
        v0=fem.NodalField(mesh, v_new, "volume"),
        w0=fem.NodalField(mesh, w_new, "volume"),
        z0=fem.NodalField(mesh, z_new, "volume"),
    )


def run_macro(mesh, params, coeffs, trace_req=None, initials=None,
              rel_tol=1e-12, max_iter=20000):
    """Run the homogenized system from t=0 to T and collect a Trace.

    The energy series carry the porosity weights: the quadratic form is
    ``|Y^p|/2 int u0^2 + |Y^p| int_0^t int A grad u0 . grad u0`` and the
    flux form subtracts ``|Gamma| int_0^t int (dw0/dt) u0`` from the
    initial value.
    """
    trace_req = trace_req or TraceRequest()
    if initials is None:
        from .micro import default_initials
        initials = default_initials()
    ops = MacroOperators(mesh, params, coeffs, rel_tol=rel_tol,
                         max_iter=max_iter)
    state = init_macro(mesh, initials, params, coeffs)
    samplers = _point_samplers(mesh, trace_req.points)
    n_steps = params.n_steps
    plan = _sample_plan(n_steps, params, trace_req)
    porosity = coeffs.porosity
    gamma = coeffs.interface_measure

    names = ["mass_u0", "mass_v0", "mass_w0", "energy_quadratic",
             "energy_flux", "min_u0", "min_v0", "min_w0"]
    for p, _, _ in samplers:
        names += [point_key("u0", p), point_key("v0", p)]
    series = {k: np.empty(n_steps + 1) for k in names}
    times = np.empty(n_steps + 1)
    snapshots = []

    e_quad0 = 0.5 * porosity * state.u0.values @ (ops.M @ state.u0.values)
    diss_prev = porosity * (state.u0.values @ (ops.K_A @ state.u0.values))
    cum_diss = 0.0
    cum_flux = 0.0

    def record(n, state):
        times[n] = state.t
        u0, v0, w0 = state.u0.values, state.v0.values, state.w0.values
        series["mass_u0"][n] = ops.mass_vec @ u0
        series["mass_v0"][n] = ops.mass_vec @ v0
        series["mass_w0"][n] = ops.mass_vec @ w0
        series["energy_quadratic"][n] = \
            0.5 * porosity * u0 @ (ops.M @ u0) + cum_diss
        series["energy_flux"][n] = e_quad0 - cum_flux
        series["min_u0"][n] = u0.min()
        series["min_v0"][n] = v0.min()
        series["min_w0"][n] = w0.min()
        for p, nodes, bary in samplers:
            series[point_key("u0", p)][n] = u0[nodes] @ bary
            series[point_key("v0", p)][n] = v0[nodes] @ bary
        if plan[n] and trace_req.store_fields:
            # snapshots share the micro field names; u here means u0 etc.
            snapshots.append(Snapshot(
                t=state.t, step=n, burst_only=bool(plan[n] == 2),
                fields={"u": u0.copy(), "v": v0.copy(),
                        "w": w0.copy(), "z": state.z0.values.copy()}))

    record(0, state)
    t_start = time.perf_counter()
    for n in range(1, n_steps + 1):
        prev = state
        guess = None
        if n > 1:
            guess = (2.0 * prev.u0.values - before.u0.values,
                     2.0 * prev.v0.values - before.v0.values)
        state = step_macro(prev, params, ops, guess=guess)
        before = prev
        diss = porosity * (state.u0.values @ (ops.K_A @ state.u0.values))
        cum_diss += 0.5 * params.dt * (diss_prev + diss)
        diss_prev = diss
        dw = state.w0.values - prev.w0.values
        u_mid = 0.5 * (prev.u0.values + state.u0.values)
        cum_flux += gamma * (dw @ (ops.M @ u_mid))
        record(n, state)
    wall = time.perf_counter() - t_start

    meta = {"kind": "macro", "dt": params.dt, "T": params.T,
            "n_steps": n_steps, "n_vertices": mesh.n_vertices,
            "n_triangles": mesh.n_triangles, "porosity": porosity,
            "interface_measure": gamma,
            "sample_stride": params.sample_stride}
    return Trace(times=times, series=series, snapshots=snapshots,
                 wall_time=wall, meta=meta, mesh=mesh).validate()
