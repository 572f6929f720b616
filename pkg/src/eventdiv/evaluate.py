"""Optic-flow-to-divergence conversion and divergence error reporting."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlowField:
    """Sparse optic flow field: positions, flow vectors (px/s), FOE and batch duration."""

    positions: np.ndarray  # (P, 2)
    vectors: np.ndarray  # (P, 2)
    foe: tuple[float, float]
    tau: float

    def __post_init__(self):
        if len(self.positions) < 1:
            raise ValueError("flow field must contain at least one vector")
        if self.tau <= 0:
            raise ValueError("tau must be positive")


@dataclass(frozen=True)
class EvaluationReport:
    per_batch_errors: np.ndarray  # (n, 2): t_s, percent error
    mean_abs_error_pct: float
    mean_runtime_s: float


def of_to_divergence(field: FlowField) -> float:
    """Divergence as the mean rate of perceived radial expansion of the flow vectors.

    Vectors whose position coincides with the FOE have no defined radius and
    are skipped with a warning.
    """
    foe = np.asarray(field.foe, dtype=np.float64)
    base = foe + field.positions
    r0 = np.linalg.norm(base, axis=1)
    valid = r0 > 0
    n_skipped = int((~valid).sum())
    if n_skipped:
        LOG.warning("skipping %d zero-radius flow vectors", n_skipped)
    if not valid.any():
        raise ValueError("no flow vectors with nonzero radius")
    r1 = np.linalg.norm(base[valid] + field.tau * field.vectors[valid], axis=1)
    terms = 1.0 - r1 / r0[valid]
    return float(terms.sum() / (len(terms) * field.tau))


def parse_flow_csv(path: str | Path) -> FlowField:
    """Read the flow CSV: header ``# foe=<fx>,<fy> tau=<t>``, rows ``px,py,vx,vy``."""
    foe = None
    tau = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line.lstrip("#").split():
                    key, _, value = token.partition("=")
                    if key == "foe":
                        fx, fy = value.split(",")
                        foe = (float(fx), float(fy))
                    elif key == "tau":
                        tau = float(value)
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: expected px,py,vx,vy")
            rows.append([float(v) for v in parts])
    if foe is None or tau is None:
        raise ValueError("flow CSV missing '# foe=<fx>,<fy> tau=<t>' header")
    data = np.asarray(rows, dtype=np.float64)
    return FlowField(data[:, :2], data[:, 2:], foe, tau)


def divergence_error(
    estimates: np.ndarray, ground_truth: np.ndarray, runtimes: np.ndarray | None = None
) -> EvaluationReport:
    """Percent error of each estimate against the closest-in-time ground truth.

    ``estimates`` and ``ground_truth`` are (n, 2) arrays of (t_s, divergence).
    Ground-truth values indistinguishable from zero are excluded with a warning.
    """
    estimates = np.atleast_2d(np.asarray(estimates, dtype=np.float64))
    ground_truth = np.atleast_2d(np.asarray(ground_truth, dtype=np.float64))
    if len(estimates) == 0 or len(ground_truth) == 0:
        raise ValueError("estimates and ground truth must be non-empty")
    gt_t = ground_truth[:, 0]
    order = np.argsort(gt_t)
    gt_t = gt_t[order]
    gt_d = ground_truth[order, 1]

    idx = np.searchsorted(gt_t, estimates[:, 0])
    idx = np.clip(idx, 0, len(gt_t) - 1)
    left = np.clip(idx - 1, 0, len(gt_t) - 1)
    use_left = np.abs(gt_t[left] - estimates[:, 0]) <= np.abs(gt_t[idx] - estimates[:, 0])
    closest = np.where(use_left, left, idx)
    d_gt = gt_d[closest]

    valid = np.abs(d_gt) >= 1e-12
    if not valid.all():
        LOG.warning(
            "excluding %d estimates whose closest ground truth is ~0", int((~valid).sum())
        )
    if not valid.any():
        raise ValueError("no ground-truth values usable for percent error")
    pct = 100.0 * np.abs(estimates[valid, 1] - d_gt[valid]) / np.abs(d_gt[valid])
    per_batch = np.column_stack([estimates[valid, 0], pct])
    mean_runtime = float(np.mean(runtimes)) if runtimes is not None and len(runtimes) else 0.0
    return EvaluationReport(per_batch, float(pct.mean()), mean_runtime)
