"""Figure rendering for evaluation reports and experiment summaries.

Figures are written next to the delimited outputs of the report path; the
CSV files remain the machine-readable interface. The Agg backend keeps
rendering headless and output bytes stable for fixed inputs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import RocCurve

_DPI = 120


def render_roc_figure(curves: Mapping[str, RocCurve], path: Union[str, Path],
                      title: str = "") -> None:
    """One ROC plot with a labeled curve per model, AUROC in the legend."""
    fig, ax = plt.subplots(figsize=(5, 4.2))
    for name, curve in curves.items():
        xs = [p[0] for p in curve.points]
        ys = [p[1] for p in curve.points]
        ax.plot(xs, ys, lw=1.6, label=f"{name} (AUROC {curve.auroc:.2f})")
    ax.plot([0, 1], [0, 1], ls="--", lw=0.8, color="0.5")
    ax.set_xlabel("False-positive rate")
    ax.set_ylabel("True-positive rate")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_auroc_bars(rows: Sequence[tuple[str, str, float]],
                      path: Union[str, Path], title: str = "") -> None:
    """Grouped bars of AUROC per (model, test set) pair.

    rows: (model, test_set, auroc) triples.
    """
    models = sorted({m for m, _, _ in rows})
    testsets = sorted({t for _, t, _ in rows})
    lookup = {(m, t): v for m, t, v in rows}
    width = 0.8 / max(len(models), 1)
    fig, ax = plt.subplots(figsize=(5.6, 3.8))
    for k, model in enumerate(models):
        xs = [i + k * width for i in range(len(testsets))]
        ys = [lookup.get((model, t), 0.0) for t in testsets]
        ax.bar(xs, ys, width=width * 0.92, label=model)
    ax.set_xticks([i + width * (len(models) - 1) / 2 for i in range(len(testsets))])
    ax.set_xticklabels(testsets)
    ax.axhline(0.5, ls="--", lw=0.8, color="0.5")
    ax.set_ylabel("AUROC")
    ax.set_ylim(0, 1.0)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
