"""Figure rendering for evaluation reports.

Report commands write these figures next to their CSV output: fidelity
decay curves with their fits, and the log-log scaling of logical versus
physical error rate against the fixed-slope line and the unencoded-qubit
diagonal.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fits import FidelitySeries, FitResult, fidelity_model


def plot_decay(curves: list[tuple[str, FidelitySeries, FitResult | None]], path,
               title: str = "logical fidelity decay") -> None:
    """curves: (label, series, fit or None) per physical error rate."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    colors = plt.cm.viridis(np.linspace(0.0, 0.85, max(len(curves), 2)))
    for (label, series, fit), color in zip(curves, colors):
        ax.errorbar(series.t_cycles, series.fidelity, yerr=series.err,
                    fmt="o", ms=3.5, lw=1, color=color, label=label)
        if fit is not None:
            tt = np.linspace(series.t_cycles[0], series.t_cycles[-1], 200)
            ax.plot(tt, fidelity_model(tt * fit.steps_per_cycle,
                                       fit.epsilon_per_step, fit.t0_steps),
                    "--", lw=1, color=color)
    ax.set_xlabel("error-correction cycles")
    ax.set_ylabel("logical fidelity")
    ax.set_ylim(0.45, 1.02)
    ax.axhline(0.5, color="gray", lw=0.8, ls=":")
    ax.legend(fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_scaling(points: list[tuple[float, float, float, float]], d: int, c_d: float,
                 path, title: str | None = None) -> None:
    """points: (p_phys, eps_L, ci_lo, ci_hi); draws the (d+1)/2 slope line."""
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    ps = np.array([p for p, *_ in points])
    es = np.array([e for _, e, *_ in points])
    lo = np.array([l for *_, l, _ in points])
    hi = np.array([h for *_, h in points])
    yerr = np.vstack([np.maximum(es - lo, 0), np.maximum(hi - es, 0)])
    ax.errorbar(ps, es, yerr=yerr, fmt="o", ms=4, capsize=2, label=f"d={d}")
    grid = np.geomspace(ps.min() / 1.5, ps.max() * 1.5, 50)
    ax.plot(grid, c_d * grid ** ((d + 1) / 2), "--", lw=1,
            label=f"$C_d\\,p^{{(d+1)/2}}$, $C_d$={c_d:.3g}")
    ax.plot(grid, grid, color="gray", lw=1, label="unencoded qubit")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("physical error rate per step")
    ax.set_ylabel("logical error rate per step")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
