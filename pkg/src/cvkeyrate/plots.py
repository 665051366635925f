"""Figure rendering for sweep results.

Renders the improved upper/lower bounds (solid) against the
previous-generation bound (dashed) on a log rate axis, written to file
next to the delimited output.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .pipeline import RateReport

_X_LABELS = {
    "loss_db": "channel loss (dB)",
    "n_total": "block size N (uses)",
}


def plot_sweep(
    reports: Sequence[RateReport],
    path: str | Path,
    x_field: str = "loss_db",
) -> Path:
    """Render the rate curves of one sweep to ``path`` (format by suffix)."""
    if x_field not in _X_LABELS:
        raise ValueError(f"x_field must be one of {sorted(_X_LABELS)}, got {x_field!r}")
    clean = [r for r in reports if not r.error]
    if not clean:
        raise ValueError("nothing to plot: every sweep point errored")

    xs = [getattr(r, x_field) for r in clean]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))

    def add_curve(field: str, label: str, style: str) -> None:
        pairs = [(x, getattr(r, field)) for x, r in zip(xs, clean) if getattr(r, field) > 0.0]
        if pairs:
            ax.semilogy([p[0] for p in pairs], [p[1] for p in pairs], style, label=label)

    add_curve("rate_ub", "improved upper bound", "-")
    add_curve("rate_lb", "improved lower bound", "-.")
    add_curve("rate_legacy", "previous-generation bound", "--")

    if x_field == "n_total":
        ax.set_xscale("log")
    ax.set_xlabel(_X_LABELS[x_field])
    ax.set_ylabel("secret-key rate (bits/use)")
    protocol = clean[0].protocol
    attack = clean[0].attack
    ax.set_title(f"{protocol}, {attack} attack")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
