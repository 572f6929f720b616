"""Ventral-landing motion model: radial warp, velocity domain, divergence.

Candidate vertical velocities ``nu`` are normalized by fixing the depth at
the start of the batch to 1, so the admissible domain is [-(1-eps)/tau, 0]
and divergence is recovered as nu/(1 + nu*t).

Image coordinates are treated as FOE-centered with the FOE at the image
center: warping translates by (-width/2, -height/2), scales radially, and
translates back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import EventBatch, SensorGeometry


class CheiralityError(ValueError):
    """Raised when 1 + nu*t is non-positive (surface behind the camera)."""


@dataclass(frozen=True)
class VelocityInterval:
    """Closed interval [lo, hi] of candidate normalized vertical velocities."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def split(self) -> tuple["VelocityInterval", "VelocityInterval"]:
        c = self.center
        return VelocityInterval(self.lo, c), VelocityInterval(c, self.hi)


@dataclass(frozen=True)
class DivergenceSample:
    """A timestamped divergence estimate with solver diagnostics."""

    t: float
    divergence: float
    contrast: float
    bound_gap: float
    iterations: int
    runtime: float


def velocity_domain(tau: float, epsilon: float = 1e-6) -> VelocityInterval:
    """Root search domain [-(1-epsilon)/tau, 0] for the normalized velocity."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must be in [0, 1)")
    return VelocityInterval(-(1.0 - epsilon) / tau, 0.0)


def warp_scale(t, nu: float, tau: float):
    """Radial scale factor (1 + nu*t)/(1 + nu*tau) applied to centered coordinates."""
    denom = 1.0 + nu * tau
    if denom <= 0:
        raise CheiralityError(f"1 + nu*tau = {denom} <= 0 (nu={nu}, tau={tau})")
    return (1.0 + nu * np.asarray(t, dtype=np.float64)) / denom


def radial_warp(x, y, t, nu: float, tau: float, geometry: SensorGeometry):
    """Warp event coordinates to the batch end under candidate velocity nu.

    Accepts scalars or arrays; returns warped (x, y) in un-centered pixel
    coordinates.
    """
    s = warp_scale(t, nu, tau)
    cx = geometry.width / 2.0
    cy = geometry.height / 2.0
    return cx + (np.asarray(x) - cx) * s, cy + (np.asarray(y) - cy) * s


def warp_batch(batch: EventBatch, nu: float) -> tuple[np.ndarray, np.ndarray]:
    """Warped coordinates of every event in the batch under velocity nu."""
    return radial_warp(batch.x, batch.y, batch.t, nu, batch.tau, batch.geometry)


def divergence_from_velocity(nu: float, tau: float) -> float:
    """Point divergence estimate at batch end: nu/(1 + nu*tau)."""
    denom = 1.0 + nu * tau
    if denom <= 0:
        raise CheiralityError(f"1 + nu*tau = {denom} <= 0")
    return nu / denom


def continuous_divergence(nu: float, z0: float, t: float) -> float:
    """Analytic divergence nu/(z0 + nu*t) of a constant-velocity descent."""
    denom = z0 + nu * t
    if denom <= 0:
        raise CheiralityError(f"z0 + nu*t = {denom} <= 0")
    return nu / denom
