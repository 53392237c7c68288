"""Matplotlib figure rendering for reports (file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .phase import PhaseGrid  # noqa: E402
from .trm import SolveReport  # noqa: E402


def save_phase_heatmap(grid: PhaseGrid, path) -> None:
    """Phase-transition heatmap: white cells succeed, black cells fail."""
    frac = grid.fractions()
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    im = ax.imshow(frac.T, origin="lower", cmap="gray", vmin=0.0, vmax=1.0,
                   aspect="auto", interpolation="nearest")
    ax.set_xticks(range(len(grid.n_values)))
    ax.set_xticklabels(grid.n_values)
    ax.set_yticks(range(len(grid.col_values)))
    ax.set_yticklabels(grid.col_values)
    ax.set_xlabel("n")
    ax.set_ylabel(grid.col_kind)
    ax.set_title(f"success fraction over {grid.trials} trials")
    fig.colorbar(im, ax=ax, label="success fraction")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_solve_trace(report: SolveReport, path) -> None:
    """Objective value and gradient norm across trust-region iterations."""
    f_vals = [rec.f_value for rec in report.iterates]
    g_vals = [max(rec.grad_norm, 1e-300) for rec in report.iterates]
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(5.0, 5.0), sharex=True)
    ax0.plot(f_vals, marker=".", lw=1)
    ax0.set_ylabel("objective")
    ax1.semilogy(g_vals, marker=".", lw=1, color="tab:red")
    ax1.set_ylabel("gradient norm")
    ax1.set_xlabel("iteration")
    ax0.set_title(f"status: {report.status.value}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
