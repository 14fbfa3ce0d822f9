"""Render sweep curves to PNG files next to their CSV tables."""

from __future__ import annotations

from pathlib import Path

from .experiments import SlopeFit, SweepRecord


def render_sweep_figure(
    curves: dict[str, list[SweepRecord]],
    out_path,
    title: str = "",
    slopes: dict[str, SlopeFit] | None = None,
) -> Path:
    """Log-log errorbar plot of every curve; returns the written path.

    matplotlib is imported lazily so CSV-only runs never pay for it.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for label, records in curves.items():
        ks = [r.k for r in records]
        ests = [r.estimate for r in records]
        errs = [r.stderr for r in records]
        leg = label
        if slopes and label in slopes:
            leg = f"{label} (slope {slopes[label].slope:.3f})"
        ax.errorbar(ks, ests, yerr=errs, marker="o", capsize=2, label=leg)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("k")
    ax.set_ylabel("k-variance estimate")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    out_path = Path(out_path)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
