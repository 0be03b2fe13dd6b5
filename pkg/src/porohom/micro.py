"""Time stepper for the coupled pore-scale system: two diffusing volume
species exchanging mass with the precipitate ODE on the hole boundaries.

Scheme (one step): the precipitate is advanced nodewise with the explicit
reaction / implicit ramp rule from :mod:`porohom.kinetics`; the resulting
discrete increment defines the boundary flux ``g = eps * dw/dt`` which is
fed, through the lumped interface mass, into implicit-Euler diffusion
solves for both species.  Reusing the same discrete increment everywhere
makes the total mass ``int u + eps int_Gamma w`` telescope exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import fem
from . import mesh as msh
from .errors import InterpolationError, ValidationError
from .kinetics import psi_reg, reaction_rate, step_precipitate


@dataclass
class TraceRequest:
    """What a run should record.

    Scalar series (masses, energies, point values, minima) are recorded at
    every time step.  Field snapshots are kept every ``sample_stride`` steps
    plus a denser burst (every ``burst_stride`` steps) on [0, burst_T] to
    resolve the initial transient.
    """

    points: tuple = ((0.6, 0.5),)
    store_fields: bool = True
    burst_T: float = 0.5
    burst_stride: int = 2


@dataclass
class Snapshot:
    t: float
    step: int
    burst_only: bool
    fields: dict


@dataclass
class Trace:
    """Per-step scalar series plus sampled field snapshots of one run."""

    times: np.ndarray
    series: dict
    snapshots: list
    wall_time: float
    meta: dict
    mesh: object = None

    def sample_times(self, include_burst=True):
        return np.array([s.t for s in self.snapshots
                         if include_burst or not s.burst_only])

    def regular_snapshots(self):
        return [s for s in self.snapshots if not s.burst_only]

    def validate(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("trace times are not strictly increasing")
        n = len(self.times)
        for name, s in self.series.items():
            if len(s) != n:
                raise ValidationError(f"series {name!r} length {len(s)} != {n}")
        return self


@dataclass
class MicroState:
    """Nodal fields of the pore-scale system at one time."""

    t: float
    u: fem.NodalField
    v: fem.NodalField
    w: fem.NodalField
    z: fem.NodalField

    def validate(self, tol=1e-12):
        for f in (self.u, self.v, self.w, self.z):
            f.validate()
        for name, f in (("u", self.u), ("v", self.v), ("w", self.w)):
            if len(f.values) and f.values.min() < -tol:
                raise ValidationError(
                    f"{name} dips to {f.values.min():.3e}, below -{tol:g}")
        if len(self.z.values) and (self.z.values.min() < 0.0
                                   or self.z.values.max() > 1.0):
            raise ValidationError("z leaves [0, 1]")
        return self


class MicroOperators:
    """Matrices assembled once per mesh and reused across all steps."""

    def __init__(self, mesh, params, rel_tol=1e-12, max_iter=20000):
        self.mesh = mesh
        self.params = params
        self.rel_tol = rel_tol
        self.max_iter = max_iter
        self.M = fem.assemble_mass(mesh)
        self.K = fem.assemble_stiffness(mesh, np.eye(2))
        self.A_u = (self.M + params.dt * params.D1 * self.K).tocsr()
        self.A_v = (self.M + params.dt * params.D2 * self.K).tocsr()
        self.mass_vec = self.M @ np.ones(mesh.n_vertices)
        self.iface = mesh.interface_vertices()
        if len(self.iface):
            lumped = fem.assemble_interface_mass(mesh, msh.INTERFACE, lumped=True)
            self.iface_weights = lumped.diagonal()[self.iface]
        else:
            self.iface_weights = np.zeros(0)

    def solve(self, A, b, x0):
        return fem.solve_spd(A, b, rel_tol=self.rel_tol,
                             max_iter=self.max_iter, x0=x0)


def init_micro(mesh, initials, params):
    """Interpolate initial expressions onto the mesh and build the state.

    ``initials`` maps "u", "v", "w" to callables of (x1, x2).  Negative
    initial data anywhere on the mesh is rejected.
    """
    x = mesh.vertices[:, 0]
    y = mesh.vertices[:, 1]
    u0 = np.asarray(initials["u"](x, y), dtype=float)
    v0 = np.asarray(initials["v"](x, y), dtype=float)
    iface = mesh.interface_vertices()
    w0 = np.asarray(initials["w"](x[iface], y[iface]), dtype=float) \
        if len(iface) else np.zeros(0)
    for name, vals in (("u", u0), ("v", v0), ("w", w0)):
        if len(vals) and vals.min() < 0.0:
            raise ValidationError(
                f"initial {name} is negative (min {vals.min():.3e}); "
                f"nonnegative initial data required")
    z0 = psi_reg(w0, params.delta) if len(w0) else np.zeros(0)
    return MicroState(
        t=0.0,
        u=fem.NodalField(mesh, u0, "volume"),
        v=fem.NodalField(mesh, v0, "volume"),
        w=fem.NodalField(mesh, w0, "surface", vertex_ids=iface),
        z=fem.NodalField(mesh, z0, "surface", vertex_ids=iface),
    ).validate()


def step_micro(state, params, ops, guess=None):
    """Advance one time step; returns a new MicroState.

    ``guess`` optionally supplies (u, v) start vectors for the two CG
    solves (the run loop passes a linear-in-time extrapolation, which cuts
    the iteration count without changing the converged result).
    """
    mesh = ops.mesh
    u = state.u.values
    v = state.v.values
    w = state.w.values
    iface = ops.iface
    dt = params.dt

    if len(iface):
        rate = reaction_rate(u[iface], v[iface], params)
        w_new = step_precipitate(w, rate, params)
        dw = w_new - w
    else:
        w_new = w
        dw = np.zeros(0)

    b_u = ops.M @ u
    b_v = ops.M @ v
    if len(iface):
        sink = params.epsilon * ops.iface_weights * dw
        b_u[iface] -= sink
        b_v[iface] -= sink
    x0_u, x0_v = guess if guess is not None else (u, v)
    u_new = ops.solve(ops.A_u, b_u, x0=x0_u)
    v_new = ops.solve(ops.A_v, b_v, x0=x0_v)
    z_new = psi_reg(w_new, params.delta) if len(iface) else w_new

    t_new = state.t + dt
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))
            and np.all(np.isfinite(w_new))):
        raise ValidationError(
            f"NaN/Inf at t={t_new:.6g}: "
            f"u in [{np.nanmin(u_new):.3e}, {np.nanmax(u_new):.3e}], "
            f"v in [{np.nanmin(v_new):.3e}, {np.nanmax(v_new):.3e}], "
            f"w in [{np.nanmin(w_new) if len(w_new) else 0:.3e}, "
            f"{np.nanmax(w_new) if len(w_new) else 0:.3e}]")
    return MicroState(
        t=t_new,
        u=fem.NodalField(mesh, u_new, "volume"),
        v=fem.NodalField(mesh, v_new, "volume"),
        w=fem.NodalField(mesh, w_new, "surface", vertex_ids=iface),
        z=fem.NodalField(mesh, z_new, "surface", vertex_ids=iface),
    )


def point_key(species, p):
    """Series name of a point trace; semicolon-separated to stay CSV-safe."""
    return f"{species}@({p[0]:g};{p[1]:g})"


def _point_samplers(mesh, points):
    samplers = []
    for p in points:
        loc = msh.locate_point(mesh, p)
        if loc is None:
            raise InterpolationError(
                f"trace point ({p[0]}, {p[1]}) is not inside the pore space")
        tri, bary = loc
        samplers.append((tuple(p), mesh.triangles[tri], bary))
    return samplers


def _sample_plan(n_steps, params, trace_req):
    stride = params.sample_stride
    burst_steps = int(round(trace_req.burst_T / params.dt))
    plan = np.zeros(n_steps + 1, dtype=np.int8)  # 0 none, 1 regular, 2 burst
    for n in range(n_steps + 1):
        if n % stride == 0 or n == n_steps:
            plan[n] = 1
        elif n <= burst_steps and n % trace_req.burst_stride == 0:
            plan[n] = 2
    return plan


def run_micro(mesh, params, trace_req=None, initials=None, rel_tol=1e-12,
              max_iter=20000):
    """Run the pore-scale system from t=0 to T and collect a Trace.

    Scalar series are recorded every step: total masses, the two energy
    forms (the quadratic one and the boundary-flux one, accumulated with
    the per-step trapezoidal rule), field minima and point traces.
    """
    trace_req = trace_req or TraceRequest()
    if initials is None:
        initials = default_initials()
    ops = MicroOperators(mesh, params, rel_tol=rel_tol, max_iter=max_iter)
    state = init_micro(mesh, initials, params)
    samplers = _point_samplers(mesh, trace_req.points)
    n_steps = params.n_steps
    plan = _sample_plan(n_steps, params, trace_req)

    names = ["mass_u", "mass_v", "mass_w", "energy_quadratic", "energy_flux",
             "min_u", "min_v", "min_w"]
    for p, _, _ in samplers:
        names += [point_key("u", p), point_key("v", p)]
    series = {k: np.empty(n_steps + 1) for k in names}
    times = np.empty(n_steps + 1)
    snapshots = []

    e_quad0 = 0.5 * state.u.values @ (ops.M @ state.u.values)
    diss_prev = params.D1 * (state.u.values @ (ops.K @ state.u.values))
    cum_diss = 0.0
    cum_flux = 0.0

    def record(n, state):
        times[n] = state.t
        u, v, w = state.u.values, state.v.values, state.w.values
        series["mass_u"][n] = ops.mass_vec @ u
        series["mass_v"][n] = ops.mass_vec @ v
        series["mass_w"][n] = params.epsilon * (ops.iface_weights @ w) \
            if len(w) else 0.0
        series["energy_quadratic"][n] = 0.5 * u @ (ops.M @ u) + cum_diss
        series["energy_flux"][n] = e_quad0 - cum_flux
        series["min_u"][n] = u.min()
        series["min_v"][n] = v.min()
        series["min_w"][n] = w.min() if len(w) else 0.0
        for p, nodes, bary in samplers:
            series[point_key("u", p)][n] = u[nodes] @ bary
            series[point_key("v", p)][n] = v[nodes] @ bary
        if plan[n] and trace_req.store_fields:
            snapshots.append(Snapshot(
                t=state.t, step=n, burst_only=bool(plan[n] == 2),
                fields={"u": u.copy(), "v": v.copy(),
                        "w": w.copy(), "z": state.z.values.copy()}))

    record(0, state)
    t_start = time.perf_counter()
    for n in range(1, n_steps + 1):
        prev = state
        guess = None
        if n > 1:
            guess = (2.0 * prev.u.values - before.u.values,
                     2.0 * prev.v.values - before.v.values)
        state = step_micro(prev, params, ops, guess=guess)
        before = prev
        diss = params.D1 * (state.u.values @ (ops.K @ state.u.values))
        cum_diss += 0.5 * params.dt * (diss_prev + diss)
        diss_prev = diss
        if len(ops.iface):
            dw = state.w.values - prev.w.values
            u_mid = 0.5 * (prev.u.values[ops.iface] + state.u.values[ops.iface])
            cum_flux += params.epsilon * (ops.iface_weights * dw) @ u_mid
        record(n, state)
    wall = time.perf_counter() - t_start

    meta = {"kind": "micro", "epsilon": params.epsilon, "dt": params.dt,
            "T": params.T, "n_steps": n_steps,
            "n_vertices": mesh.n_vertices, "n_triangles": mesh.n_triangles,
            "sample_stride": params.sample_stride}
    return Trace(times=times, series=series, snapshots=snapshots,
                 wall_time=wall, meta=meta, mesh=mesh).validate()


def total_mass(mesh, field, epsilon=None):
    """Mass functional of a nodal field.

    Volume fields integrate against the P1 mass matrix; surface fields use
    the epsilon-scaled interface measure (``epsilon`` required).
    """
    if field.kind == "volume":
        M = fem.assemble_mass(mesh)
        return float(np.ones(mesh.n_vertices) @ (M @ field.values))
    if field.kind == "surface":
        if epsilon is None:
            raise ValidationError("surface mass needs the epsilon scale factor")
        if len(field.values) == 0:
            return 0.0
        Mg = fem.assemble_interface_mass(mesh, msh.INTERFACE, lumped=False)
        full = np.zeros(mesh.n_vertices)
        ids = field.vertex_ids if field.vertex_ids is not None \
            else mesh.interface_vertices()
        full[ids] = field.values
        return float(epsilon * (np.ones(mesh.n_vertices) @ (Mg @ full)))
    raise ValidationError(f"unknown field kind {field.kind!r}")


def default_initials():
    """The linear initial profiles used throughout the default setup."""
    return {"u": lambda x, y: 5.0 * (x + y),
            "v": lambda x, y: 8.0 * x + 2.0 * y,
            "w": lambda x, y: 3.0 * x + y}
