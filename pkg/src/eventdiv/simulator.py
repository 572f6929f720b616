"""Synthetic ventral-landing event generator with exact analytic ground truth.

Scene points sit on a fronto-parallel plane and the camera descends at a
constant vertical velocity, so each point's image trajectory is a closed-form
radial expansion from the image center. An event is emitted whenever a
point's radial displacement since its previous event reaches a fixed pixel
spacing, which keeps the geometry consumed by the estimator without
simulating intensity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .events import EventStream, SensorGeometry
from .geometry import CheiralityError, continuous_divergence

GROUND_TRUTH_RATE_HZ = 33.0


@dataclass(frozen=True)
class SimConfig:
    z0: float = 1.0
    nu: float = -0.3
    focal_length: float = 100.0
    geometry: SensorGeometry = field(default_factory=lambda: SensorGeometry(160, 90))
    duration: float = 2.0
    n_points: int = 500
    event_spacing_px: float = 1.0
    noise_px: float = 0.0
    noise_event_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.z0 <= 0:
            raise ValueError("z0 must be positive")
        if self.nu > 0:
            raise ValueError("nu must be <= 0 for descent")
        if self.z0 + self.nu * self.duration <= 0:
            raise CheiralityError(
                "camera reaches the surface before the end of the run"
            )
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.event_spacing_px <= 0:
            raise ValueError("event_spacing_px must be positive")
        if not 0 <= self.noise_event_fraction < 1:
            raise ValueError("noise_event_fraction must be in [0, 1)")


@dataclass(frozen=True)
class GroundTruth:
    """Divergence samples (t, nu/(z0 + nu*t)) on a fixed-rate grid."""

    samples: np.ndarray  # (n, 2): t_s, divergence


def ground_truth_divergence(config: SimConfig, t: float) -> float:
    """Exact analytic divergence at time t."""
    return continuous_divergence(config.nu, config.z0, t)


def normalized_velocity(config: SimConfig, t_start: float) -> float:
    """True normalized velocity for a batch starting at t_start.

    Rescales the depth at batch start to 1, which is the convention the
    solver's velocity domain uses.
    """
    return config.nu / (config.z0 + config.nu * t_start)


def _trajectory_events(config: SimConfig, rng: np.random.Generator):
    g = config.geometry
    cx, cy = g.width / 2.0, g.height / 2.0
    # uniform image positions at t=0 over the visible patch of the plane
    px0 = rng.uniform(-cx, cx, size=config.n_points)
    py0 = rng.uniform(-cy, cy, size=config.n_points)
    r0 = np.hypot(px0, py0)

    xs, ys, ts = [], [], []
    if config.nu == 0:
        # static scene: no radial motion, no trajectory events
        return xs, ys, ts
    z_end = config.z0 + config.nu * config.duration
    expand_max = config.z0 / z_end  # maximal radial scale over the run
    for j in range(config.n_points):
        if r0[j] == 0.0:
            continue  # point at the FOE never moves
        r_max = r0[j] * expand_max
        k_max = int(np.floor((r_max - r0[j]) / config.event_spacing_px))
        if k_max < 1:
            continue
        r_k = r0[j] + config.event_spacing_px * np.arange(1, k_max + 1)
        # invert r(t) = r0*z0/(z0 + nu t) at the displacement thresholds
        t_k = (config.z0 / config.nu) * (r0[j] - r_k) / r_k
        scale = r_k / r0[j]
        ex = cx + px0[j] * scale
        ey = cy + py0[j] * scale
        inside = (ex >= 0) & (ex < g.width) & (ey >= 0) & (ey < g.height)
        # radius grows monotonically, so once out of frame the point stays out
        if not inside.all():
            first_out = int(np.argmin(inside))
            ex, ey, t_k = ex[:first_out], ey[:first_out], t_k[:first_out]
        xs.append(ex)
        ys.append(ey)
        ts.append(t_k)
    return xs, ys, ts


def generate_landing_events(config: SimConfig) -> tuple[EventStream, GroundTruth]:
    """Generate the event stream and fixed-rate ground truth for one landing run."""
    rng = np.random.default_rng(config.seed)
    g = config.geometry
    xs, ys, ts = _trajectory_events(config, rng)
    if xs:
        x = np.concatenate(xs)
        y = np.concatenate(ys)
        t = np.concatenate(ts)
    else:
        x = y = t = np.empty(0, dtype=np.float64)

    if config.noise_px > 0 and len(x):
        x = x + rng.normal(0.0, config.noise_px, size=len(x))
        y = y + rng.normal(0.0, config.noise_px, size=len(y))
        keep = (x >= 0) & (x < g.width) & (y >= 0) & (y < g.height)
        x, y, t = x[keep], y[keep], t[keep]

    if config.noise_event_fraction > 0:
        # clutter makes up noise_event_fraction of the emitted stream
        frac = config.noise_event_fraction
        n_clutter = int(round(len(x) * frac / (1.0 - frac)))
        x = np.concatenate([x, rng.uniform(0, g.width, n_clutter)])
        y = np.concatenate([y, rng.uniform(0, g.height, n_clutter)])
        t = np.concatenate([t, rng.uniform(0, config.duration, n_clutter)])

    polarity = rng.choice(np.array([-1, 1], dtype=np.int8), size=len(x))
    order = np.argsort(t, kind="stable")
    stream = EventStream(x[order], y[order], t[order], polarity[order], g)

    gt_t = np.arange(0.0, config.duration, 1.0 / GROUND_TRUTH_RATE_HZ)
    gt_d = config.nu / (config.z0 + config.nu * gt_t)
    ground_truth = GroundTruth(np.column_stack([gt_t, gt_d]))
    return stream, ground_truth
