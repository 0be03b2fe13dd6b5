"""Pointwise surface chemistry: the saturating precipitation rate, the
regularized dissolution ramp, and the precipitate ODE integrator shared by
the micro and macro steppers.  Everything here is a pure function over
floats or arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ModelParams:
    """Kinetic and diffusive constants plus the time grid.

    ``k`` is the derived ratio k_f / k_d.  ``k_d = 0`` (no surface reaction
    at all) is allowed as long as k_f = 0 too; that switch turns both
    solvers into pure diffusion.
    """

    D1: float = 1.0
    D2: float = 2.0
    k_f: float = 1.8
    k_d: float = 2.2
    k1: float = 1.0
    k2: float = 1.0
    delta: float = 0.01
    epsilon: float = 0.2
    dt: float = 0.01
    T: float = 20.0
    sample_stride: int = 10

    def __post_init__(self):
        for name in ("D1", "D2", "delta", "epsilon", "dt", "T"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("k_f", "k_d", "k1", "k2"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative, got {getattr(self, name)}")
        if self.k_d == 0.0 and self.k_f != 0.0:
            raise ValidationError("k_f must vanish when k_d = 0 (k = k_f/k_d undefined)")
        if self.dt > self.T:
            raise ValidationError(f"dt = {self.dt} exceeds T = {self.T}")
        if self.sample_stride < 1:
            raise ValidationError("sample_stride must be >= 1")

    @property
    def k(self):
        return self.k_f / self.k_d if self.k_d > 0 else 0.0

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))


def reaction_rate(u, v, params):
    """Precipitation rate, zero off the positive quadrant.

    ``k * k1*u * k2*v / (1 + k1*u + k2*v)**2`` for u > 0 and v > 0, else 0.
    The denominator exceeds 1 there, so the value is finite and bounded by k.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    pos = (u > 0) & (v > 0)
    a = np.where(pos, params.k1 * u, 0.0)
    b = np.where(pos, params.k2 * v, 0.0)
    r = params.k * a * b / (1.0 + a + b) ** 2
    r = np.where(pos, r, 0.0)
    return float(r) if r.ndim == 0 else r


def psi_reg(w, delta):
    """Ramp regularization of the dissolution graph: clamp(w/delta, 0, 1)."""
    if delta <= 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    w = np.asarray(w, dtype=float)
    out = np.clip(w / delta, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def w_rhs(u, v, w, params):
    """Right-hand side of the precipitate ODE: k_d * (R(u, v) - psi(w))."""
    return params.k_d * (reaction_rate(u, v, params) - psi_reg(w, params.delta))


def step_precipitate(w, rate, params):
    """One semi-implicit step of  dw/dt = k_d (R - psi_delta(w)).

    The reaction value ``rate`` is explicit; the dissolution ramp is treated
    implicitly, which keeps the update stable and sign-preserving for any
    dt (the explicit ramp would overshoot once dt > delta/k_d).  With
    a = w + dt*k_d*rate the implicit equation is piecewise linear:

        w_next = a                          if a <= 0
        w_next = a / (1 + dt*k_d/delta)     if 0 < a < delta + dt*k_d
        w_next = a - dt*k_d                 otherwise
    """
    w = np.asarray(w, dtype=float)
    a = w + params.dt * params.k_d * np.asarray(rate, dtype=float)
    ramp = a / (1.0 + params.dt * params.k_d / params.delta)
    out = np.where(a <= 0.0, a,
                   np.where(a < params.delta + params.dt * params.k_d,
                            ramp, a - params.dt * params.k_d))
    return float(out) if out.ndim == 0 else out
