"""Run configuration: a line-oriented ``section.key = value`` format.

Unknown keys are hard errors (no silent typo tolerance), ``#`` starts a
comment, every key has a shipped default.  Initial conditions are degree-2
polynomials in x1, x2 parsed by a deliberately tiny grammar
(``5*x1 + 5*x2``, ``0.5*x1^2 + 2*x1*x2``); there is no general expression
engine here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigError
from .kinetics import ModelParams


class Poly2:
    """Polynomial of total degree <= 2 in (x1, x2)."""

    def __init__(self, coeffs):
        # coeffs maps (d1, d2) -> coefficient, d1 + d2 <= 2
        self.coeffs = {k: float(v) for k, v in sorted(coeffs.items())
                       if v != 0.0}
        for (d1, d2) in self.coeffs:
            if d1 < 0 or d2 < 0 or d1 + d2 > 2:
                raise ConfigError(f"monomial x1^{d1}*x2^{d2} exceeds degree 2")

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape)
        for (d1, d2), c in self.coeffs.items():
            out = out + c * x1 ** d1 * x2 ** d2
        return float(out) if out.ndim == 0 else out

    def __eq__(self, other):
        return isinstance(other, Poly2) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def __repr__(self):
        return f"Poly2({self.to_string()!r})"

    def to_string(self):
        if not self.coeffs:
            return "0"
        parts = []
        for (d1, d2), c in sorted(self.coeffs.items()):
            mono = "*".join(["x1" if e == 1 else f"x1^{e}" for e in [d1] if e]
                            + ["x2" if e == 1 else f"x2^{e}" for e in [d2] if e])
            parts.append(repr(c) + ("*" + mono if mono else ""))
        return " + ".join(parts).replace("+ -", "- ")


def parse_poly(text, where=""):
    """Parse a degree-<=2 polynomial like ``5*x1 + 5*x2 - 0.5*x1*x2``."""
    s = text.replace(" ", "")
    if not s:
        raise ConfigError(f"empty polynomial expression{where}")
    # split into signed terms
    terms = []
    start = 0
    for i in range(1, len(s)):
        if s[i] in "+-" and s[i - 1] not in "eE*^+-":
            terms.append(s[start:i])
            start = i
    terms.append(s[start:])
    coeffs = {}
    for term in terms:
        sign = 1.0
        body = term
        while body and body[0] in "+-":
            if body[0] == "-":
                sign = -sign
            body = body[1:]
        if not body:
            raise ConfigError(f"dangling sign in polynomial{where}: {text!r}")
        coeff = sign
        d1 = d2 = 0
        for factor in body.split("*"):
            if not factor:
                raise ConfigError(f"empty factor in polynomial{where}: {text!r}")
            if factor[0] in "xX":
                var, _, exp = factor.partition("^")
                if var not in ("x1", "x2"):
                    raise ConfigError(
                        f"unknown variable {var!r} in polynomial{where} "
                        f"(use x1, x2)")
                e = 1
                if exp:
                    try:
                        e = int(exp)
                    except ValueError:
                        raise ConfigError(
                            f"bad exponent {exp!r} in polynomial{where}") from None
                if var == "x1":
                    d1 += e
                else:
                    d2 += e
            else:
                try:
                    coeff *= float(factor)
                except ValueError:
                    raise ConfigError(
                        f"bad factor {factor!r} in polynomial{where}") from None
        if d1 + d2 > 2:
            raise ConfigError(
                f"term {term!r} has degree {d1 + d2} > 2{where}")
        coeffs[(d1, d2)] = coeffs.get((d1, d2), 0.0) + coeff
    return Poly2(coeffs)


@dataclass(frozen=True)
class GeometryConfig:
    domain: tuple = (0.0, 1.2, 0.0, 1.0)
    epsilon: float = 0.2
    radius: float = 0.25
    n_gamma: int = 64
    h_cell: float = 0.02
    h_micro: float = 0.08
    h_macro: float = 0.033
    no_inclusion: bool = False


@dataclass(frozen=True)
class KineticsConfig:
    D1: float = 1.0
    D2: float = 2.0
    k_f: float = 1.8
    k_d: float = 2.2
    k1: float = 1.0
    k2: float = 1.0
    delta: float = 0.01


@dataclass(frozen=True)
class InitialsConfig:
    u: Poly2 = field(default_factory=lambda: parse_poly("5*x1 + 5*x2"))
    v: Poly2 = field(default_factory=lambda: parse_poly("8*x1 + 2*x2"))
    w: Poly2 = field(default_factory=lambda: parse_poly("3*x1 + 1*x2"))


@dataclass(frozen=True)
class RunSection:
    dt: float = 0.01
    T: float = 20.0
    sample_stride: int = 10
    burst_T: float = 0.5
    burst_stride: int = 2
    trace_points: tuple = ((0.6, 0.5),)


@dataclass(frozen=True)
class SolverSection:
    rel_tol: float = 1e-12
    max_iter: int = 50000


@dataclass(frozen=True)
class SweepSection:
    eps_list: tuple = (0.2, 0.1)


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"


@dataclass(frozen=True)
class RunConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    params: KineticsConfig = field(default_factory=KineticsConfig)
    initials: InitialsConfig = field(default_factory=InitialsConfig)
    run: RunSection = field(default_factory=RunSection)
    solver: SolverSection = field(default_factory=SolverSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    output: OutputSection = field(default_factory=OutputSection)

    def model_params(self, epsilon=None):
        """Combine the kinetic constants and time grid into ModelParams."""
        return ModelParams(
            D1=self.params.D1, D2=self.params.D2, k_f=self.params.k_f,
            k_d=self.params.k_d, k1=self.params.k1, k2=self.params.k2,
            delta=self.params.delta,
            epsilon=self.geometry.epsilon if epsilon is None else epsilon,
            dt=self.run.dt, T=self.run.T,
            sample_stride=self.run.sample_stride)

    def initial_functions(self):
        return {"u": self.initials.u, "v": self.initials.v,
                "w": self.initials.w}

    def validate(self):
        g = self.geometry
        x0, x1, y0, y1 = g.domain
        if x1 <= x0 or y1 <= y0:
            raise ConfigError(f"geometry.domain {g.domain} is empty")
        if not g.no_inclusion and not (0.0 < g.radius < 0.45):
            raise ConfigError(
                f"geometry.radius = {g.radius} violates 0 < radius < 0.45")
        if g.n_gamma % 2 or g.n_gamma < 16:
            raise ConfigError("geometry.n_gamma must be even and >= 16")
        for name in ("epsilon", "h_cell", "h_micro", "h_macro"):
            if getattr(g, name) <= 0:
                raise ConfigError(f"geometry.{name} must be positive")
        try:
            self.model_params()
        except Exception as exc:
            raise ConfigError(str(exc)) from None
        for p in self.run.trace_points:
            if not (x0 <= p[0] <= x1 and y0 <= p[1] <= y1):
                raise ConfigError(
                    f"trace point ({p[0]}, {p[1]}) lies outside the domain")
        if self.run.burst_T < 0 or self.run.burst_stride < 1:
            raise ConfigError("run.burst_T must be >= 0, run.burst_stride >= 1")
        if self.solver.rel_tol <= 0 or self.solver.max_iter < 1:
            raise ConfigError("solver.rel_tol and solver.max_iter must be positive")
        for e in self.sweep.eps_list:
            if e <= 0:
                raise ConfigError(f"sweep.eps_list entry {e} must be positive")
        return self


def _parse_bool(text):
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text, n=None):
    vals = tuple(float(p) for p in text.split(",") if p.strip() != "")
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} comma-separated numbers, got {len(vals)}")
    return vals


def _parse_points(text):
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            pts.append(_parse_floats(chunk, 2))
    return tuple(pts)


#: key -> (section attr, field name, value parser)
_KEYS = {
    "geometry.domain": ("geometry", "domain", lambda s: _parse_floats(s, 4)),
    "geometry.epsilon": ("geometry", "epsilon", float),
    "geometry.radius": ("geometry", "radius", float),
    "geometry.n_gamma": ("geometry", "n_gamma", int),
    "geometry.h_cell": ("geometry", "h_cell", float),
    "geometry.h_micro": ("geometry", "h_micro", float),
    "geometry.h_macro": ("geometry", "h_macro", float),
    "geometry.no_inclusion": ("geometry", "no_inclusion", _parse_bool),
    "params.D1": ("params", "D1", float),
    "params.D2": ("params", "D2", float),
    "params.k_f": ("params", "k_f", float),
    "params.k_d": ("params", "k_d", float),
    "params.k1": ("params", "k1", float),
    "params.k2": ("params", "k2", float),
    "params.delta": ("params", "delta", float),
    "initials.u": ("initials", "u", parse_poly),
    "initials.v": ("initials", "v", parse_poly),
    "initials.w": ("initials", "w", parse_poly),
    "run.dt": ("run", "dt", float),
    "run.T": ("run", "T", float),
    "run.sample_stride": ("run", "sample_stride", int),
    "run.burst_T": ("run", "burst_T", float),
    "run.burst_stride": ("run", "burst_stride", int),
    "run.trace_points": ("run", "trace_points", _parse_points),
    "solver.rel_tol": ("solver", "rel_tol", float),
    "solver.max_iter": ("solver", "max_iter", int),
    "sweep.eps_list": ("sweep", "eps_list", _parse_floats),
    "output.dir": ("output", "dir", str),
}


def parse_config(text):
    """Parse configuration text into a validated RunConfig."""
    sections = {"geometry": {}, "params": {}, "initials": {}, "run": {},
                "solver": {}, "sweep": {}, "output": {}}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', "
                              f"got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        spec = _KEYS.get(key)
        if spec is None:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        section, name, parser = spec
        try:
            sections[section][name] = parser(value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") \
                from None
    cfg = RunConfig(
        geometry=GeometryConfig(**sections["geometry"]),
        params=KineticsConfig(**sections["params"]),
        initials=InitialsConfig(**sections["initials"]),
        run=RunSection(**sections["run"]),
        solver=SolverSection(**sections["solver"]),
        sweep=SweepSection(**sections["sweep"]),
        output=OutputSection(**sections["output"]),
    )
    return cfg.validate()


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Poly2):
        return value.to_string()
    if isinstance(value, str):
        return value
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(",".join(repr(float(x)) for x in p) for p in value)
        return ",".join(repr(float(x)) for x in value)
    raise ConfigError(f"cannot serialize {value!r}")


def serialize_config(cfg):
    """Canonical text form; parse_config(serialize_config(c)) == c."""
    lines = []
    for key, (section, name, _) in _KEYS.items():
        value = getattr(getattr(cfg, section), name)
        lines.append(f"{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def default_config():
    return RunConfig().validate()
