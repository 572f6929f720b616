"""Motion-compensated event images, the contrast objective, and its interval bound.

The interval upper bound follows the segment construction: each event's warp
sweeps a straight segment as the velocity ranges over the interval, so a
conservative per-pixel count is obtained by rasterizing that segment with a
supercover traversal (every pixel whose closed unit square the closed segment
touches). Bresenham-style 8-connected lines would miss corner-touched pixels
and break the bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .events import EventBatch, SensorGeometry
from .geometry import VelocityInterval, warp_batch


@dataclass(frozen=True)
class EventImage:
    """Per-pixel accumulation grid (height x width) with its in-image event count."""

    counts: np.ndarray
    in_image_events: int

    @property
    def n_pixels(self) -> int:
        return self.counts.size

    @property
    def mean(self) -> float:
        return self.in_image_events / self.counts.size


@dataclass(frozen=True)
class ContrastBound:
    """Assembled interval bound terms: c_bar = s_bar/M - mu_lower^2."""

    s_bar: float
    mu_lower: float
    c_bar: float


def accumulate_image(batch: EventBatch, nu: float) -> EventImage:
    """Warp every event to the batch end and bin by floor; out-of-frame warps drop."""
    g = batch.geometry
    wx, wy = warp_batch(batch, nu)
    ix = np.floor(wx).astype(np.int64)
    iy = np.floor(wy).astype(np.int64)
    inside = (ix >= 0) & (ix < g.width) & (iy >= 0) & (iy < g.height)
    flat = np.bincount(
        iy[inside] * g.width + ix[inside], minlength=g.n_pixels
    ).astype(np.float64)
    return EventImage(flat.reshape(g.height, g.width), int(inside.sum()))


def image_contrast(image: EventImage) -> float:
    """Contrast = variance of the count grid about its in-image mean."""
    mu = image.mean
    return float(np.sum((image.counts - mu) ** 2) / image.counts.size)


def image_contrast_expanded(image: EventImage) -> float:
    """Equivalent expanded form: (1/M) * sum(H^2) - mean^2."""
    mu = image.mean
    return float(np.sum(image.counts**2) / image.counts.size - mu * mu)


@njit(cache=True)
def _mark_point(counts, stamp, tag, px, py, width, height):
    # a point with an exactly-integer coordinate lies on the shared edge of
    # two closed pixel squares; mark both
    fx = np.floor(px)
    fy = np.floor(py)
    ix0 = int(fx)
    iy0 = int(fy)
    x_lo = ix0 - 1 if px == fx else ix0
    y_lo = iy0 - 1 if py == fy else iy0
    for ix in range(x_lo, ix0 + 1):
        if ix < 0 or ix >= width:
            continue
        for iy in range(y_lo, iy0 + 1):
            if iy < 0 or iy >= height:
                continue
            if stamp[iy, ix] != tag:
                stamp[iy, ix] = tag
                counts[iy, ix] += 1.0


@njit(cache=True)
def _rasterize_into(counts, stamp, tag, ax, ay, bx, by, width, height, ts):
    """Supercover-mark every pixel whose closed square meets the closed segment.

    Pixels are deduplicated per tag via the stamp grid, so each call adds at
    most 1 to any pixel. The segment is first clipped to the image rectangle.
    """
    if ax == bx and ay == by:
        # degenerate segment: bin like the point accumulator (floor rule)
        ix = int(np.floor(ax))
        iy = int(np.floor(ay))
        if 0 <= ix < width and 0 <= iy < height and stamp[iy, ix] != tag:
            stamp[iy, ix] = tag
            counts[iy, ix] += 1.0
        return
    dx = bx - ax
    dy = by - ay
    t0 = 0.0
    t1 = 1.0
    if dx == 0.0:
        if ax < 0.0 or ax > width:
            return
    else:
        ta = (0.0 - ax) / dx
        tb = (width - ax) / dx
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
    if dy == 0.0:
        if ay < 0.0 or ay > height:
            return
    else:
        ta = (0.0 - ay) / dy
        tb = (height - ay) / dy
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
    if t0 > t1:
        return
    cx0 = ax + t0 * dx
    cy0 = ay + t0 * dy
    cx1 = ax + t1 * dx
    cy1 = ay + t1 * dy
    ddx = cx1 - cx0
    ddy = cy1 - cy0
    n_ts = 0
    ts[n_ts] = 0.0
    n_ts += 1
    ts[n_ts] = 1.0
    n_ts += 1
    if ddx != 0.0:
        xmin = min(cx0, cx1)
        xmax = max(cx0, cx1)
        k = int(np.ceil(xmin))
        while k <= xmax:
            s = (k - cx0) / ddx
            if s < 0.0:
                s = 0.0
            elif s > 1.0:
                s = 1.0
            ts[n_ts] = s
            n_ts += 1
            k += 1
    if ddy != 0.0:
        ymin = min(cy0, cy1)
        ymax = max(cy0, cy1)
        k = int(np.ceil(ymin))
        while k <= ymax:
            s = (k - cy0) / ddy
            if s < 0.0:
                s = 0.0
            elif s > 1.0:
                s = 1.0
            ts[n_ts] = s
            n_ts += 1
            k += 1
    tvals = np.sort(ts[:n_ts])
    for j in range(n_ts):
        s = tvals[j]
        _mark_point(counts, stamp, tag, cx0 + s * ddx, cy0 + s * ddy, width, height)
        if j + 1 < n_ts:
            sm = 0.5 * (s + tvals[j + 1])
            _mark_point(counts, stamp, tag, cx0 + sm * ddx, cy0 + sm * ddy, width, height)


@njit(cache=True)
def _bound_image_kernel(x0, y0, x1, y1, width, height, counts, stamp):
    """Accumulate one supercover-rasterized segment per event; count fully-inside segments."""
    ts = np.empty(width + height + 6, dtype=np.float64)
    fully_inside = 0
    for i in range(x0.shape[0]):
        ax = x0[i]
        ay = y0[i]
        bx = x1[i]
        by = y1[i]
        if (
            0.0 <= ax < width
            and 0.0 <= ay < height
            and 0.0 <= bx < width
            and 0.0 <= by < height
        ):
            fully_inside += 1
        _rasterize_into(counts, stamp, i, ax, ay, bx, by, width, height, ts)
    return fully_inside


def rasterize_segment(
    p0: tuple[float, float], p1: tuple[float, float], geometry: SensorGeometry
) -> set[tuple[int, int]]:
    """Pixels of the grid whose closed unit squares intersect the closed segment p0->p1.

    A degenerate segment (p0 == p1) returns its floor-binned containing pixel.
    """
    counts = np.zeros((geometry.height, geometry.width), dtype=np.float64)
    stamp = np.full((geometry.height, geometry.width), -1, dtype=np.int64)
    ts = np.empty(geometry.width + geometry.height + 6, dtype=np.float64)
    _rasterize_into(
        counts, stamp, 0,
        float(p0[0]), float(p0[1]), float(p1[0]), float(p1[1]),
        geometry.width, geometry.height, ts,
    )
    ys, xs = np.nonzero(counts)
    return {(int(x), int(y)) for x, y in zip(xs, ys)}


def _segment_endpoints(batch: EventBatch, interval: VelocityInterval):
    x0, y0 = warp_batch(batch, interval.lo)
    x1, y1 = warp_batch(batch, interval.hi)
    return x0, y0, x1, y1


def upper_bound_image(batch: EventBatch, interval: VelocityInterval) -> EventImage:
    """Per-pixel count of events whose endpoint-warp segment touches the pixel."""
    g = batch.geometry
    x0, y0, x1, y1 = _segment_endpoints(batch, interval)
    counts = np.zeros((g.height, g.width), dtype=np.float64)
    stamp = np.full((g.height, g.width), -1, dtype=np.int64)
    _bound_image_kernel(x0, y0, x1, y1, g.width, g.height, counts, stamp)
    return EventImage(counts, int(counts.sum()))


def bound_terms(batch: EventBatch, interval: VelocityInterval) -> ContrastBound:
    """Contrast upper bound over the interval from the bound image and mean lower bound."""
    g = batch.geometry
    x0, y0, x1, y1 = _segment_endpoints(batch, interval)
    counts = np.zeros((g.height, g.width), dtype=np.float64)
    stamp = np.full((g.height, g.width), -1, dtype=np.int64)
    fully_inside = _bound_image_kernel(x0, y0, x1, y1, g.width, g.height, counts, stamp)
    m = g.n_pixels
    s_bar = float(np.sum(counts**2))
    mu_lower = fully_inside / m
    return ContrastBound(s_bar, mu_lower, s_bar / m - mu_lower**2)


def write_pgm(image: EventImage, path: str | Path) -> None:
    """Dump an event image as ASCII PGM (P2) for visual inspection."""
    counts = np.rint(image.counts).astype(np.int64)
    maxval = max(1, int(counts.max()))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("P2\n")
        fh.write(f"{counts.shape[1]} {counts.shape[0]}\n")
        fh.write(f"{maxval}\n")
        for row in counts:
            fh.write(" ".join(str(v) for v in row) + "\n")
