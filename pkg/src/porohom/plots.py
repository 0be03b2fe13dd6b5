"""Matplotlib figures saved next to the delimited output.

All figures use a fixed 8x6 inch canvas at 100 dpi, so the SVG files carry
an 800x600 viewBox.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .micro import point_key  # noqa: E402

# the SVG backend sizes by 72 pt/inch, so this yields an 800x600 viewBox
FIGSIZE = (800.0 / 72.0, 600.0 / 72.0)


def _figure():
    return plt.figure(figsize=FIGSIZE)


def energy_figure(micro_trace, macro_trace):
    """Both energy forms of both runs over time."""
    fig = _figure()
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(micro_trace.times, micro_trace.series["energy_quadratic"],
            label="micro, quadratic form", color="tab:blue")
    ax.plot(micro_trace.times, micro_trace.series["energy_flux"],
            label="micro, flux form", color="tab:blue", linestyle="--")
    ax.plot(macro_trace.times, macro_trace.series["energy_quadratic"],
            label="macro, quadratic form", color="tab:red")
    ax.plot(macro_trace.times, macro_trace.series["energy_flux"],
            label="macro, flux form", color="tab:red", linestyle="--")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("energy")
    ax.set_title("Energy of the first species, micro vs macro")
    ax.legend()
    fig.tight_layout()
    return fig


def trace_figure(micro_trace, macro_trace, point):
    """Point traces of both species, micro vs macro."""
    px, py = point
    fig = _figure()
    ax = fig.add_subplot(1, 1, 1)
    for species, color in (("u", "tab:blue"), ("v", "tab:green")):
        key_m = point_key(species, point)
        key_M = point_key(species + "0", point)
        if key_m in micro_trace.series:
            ax.plot(micro_trace.times, micro_trace.series[key_m],
                    label=f"micro {species}", color=color)
        if key_M in macro_trace.series:
            ax.plot(macro_trace.times, macro_trace.series[key_M],
                    label=f"macro {species}", color=color, linestyle="--")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("concentration")
    ax.set_title(f"Concentrations at ({px:g}, {py:g})")
    ax.legend()
    fig.tight_layout()
    return fig


def single_trace_figure(trace, point, prefix=""):
    """Point trace of one run (used by the micro/macro subcommands)."""
    px, py = point
    fig = _figure()
    ax = fig.add_subplot(1, 1, 1)
    for species, color in (("u", "tab:blue"), ("v", "tab:green")):
        key = point_key(prefix + species, point) if prefix \
            else point_key(species, point)
        key0 = point_key(species + "0", point)
        if key in trace.series:
            ax.plot(trace.times, trace.series[key], label=species, color=color)
        elif key0 in trace.series:
            ax.plot(trace.times, trace.series[key0], label=species, color=color)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("concentration")
    ax.set_title(f"Concentrations at ({px:g}, {py:g})")
    ax.legend()
    fig.tight_layout()
    return fig


def norms_figure(reports):
    """Convergence norms against epsilon on log-log axes."""
    fig = _figure()
    ax = fig.add_subplot(1, 1, 1)
    eps = [r.epsilon for r in reports]
    for name, label in (("norm_u_C_L2", "sup-t L2(u - u0)"),
                        ("norm_grad_u", "L2 grad mismatch, u"),
                        ("norm_v_C_L2", "sup-t L2(v - v0)"),
                        ("norm_grad_v", "L2 grad mismatch, v"),
                        ("norm_w_C_L2", "sup-t scaled L2(w - w0)"),
                        ("energy_sup_diff", "sup-t |E_micro - E_macro|")):
        vals = [getattr(r, name) for r in reports]
        ax.loglog(eps, vals, marker="o", label=label)
    ax.set_xlabel("epsilon")
    ax.set_ylabel("norm")
    ax.set_title("Corrector norms vs epsilon")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def close(fig):
    plt.close(fig)
