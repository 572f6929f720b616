"""Figure rendering for estimation and evaluation reports.

Figures are written straight to files (Agg backend); nothing is shown
interactively.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import EvaluationReport
from .geometry import DivergenceSample


def plot_divergence_timeline(
    samples: list[DivergenceSample],
    ground_truth: np.ndarray | None,
    path: str | Path,
) -> None:
    """Estimated divergence over time, with the ground-truth curve if available."""
    fig, ax = plt.subplots(figsize=(7, 4))
    if ground_truth is not None and len(ground_truth):
        ax.plot(ground_truth[:, 0], ground_truth[:, 1], "-", color="0.6", label="ground truth")
    ts = [s.t for s in samples]
    ds = [s.divergence for s in samples]
    ax.plot(ts, ds, "o-", ms=4, label="estimate")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("divergence [1/s]")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_evaluation_report(
    report: EvaluationReport,
    estimates: np.ndarray,
    ground_truth: np.ndarray,
    path: str | Path,
) -> None:
    """Two-panel report: divergence curves and per-batch percent error."""
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax0.plot(ground_truth[:, 0], ground_truth[:, 1], "-", color="0.6", label="ground truth")
    ax0.plot(estimates[:, 0], estimates[:, 1], "o-", ms=4, label="estimate")
    ax0.set_ylabel("divergence [1/s]")
    ax0.legend(loc="best")
    ax1.plot(report.per_batch_errors[:, 0], report.per_batch_errors[:, 1], "o-", ms=4)
    ax1.axhline(report.mean_abs_error_pct, ls="--", color="0.4",
                label=f"mean {report.mean_abs_error_pct:.2f}%")
    ax1.set_xlabel("time [s]")
    ax1.set_ylabel("abs. error [%]")
    ax1.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
