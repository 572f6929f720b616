"""Event stream containers, file I/O, preprocessing and batching.

Events are stored as parallel numpy arrays (x, y, t, polarity) rather than
per-event objects so that downstream warping and binning stay vectorized.
Timestamps are seconds (float64) internally; the on-disk formats use integer
microseconds.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

BIN_MAGIC = b"EVD1"


class EventFormatError(ValueError):
    """Raised when an event file is malformed."""


class EventValidationError(ValueError):
    """Raised when event data violates the stream invariants."""


@dataclass(frozen=True)
class SensorGeometry:
    """Sensor pixel grid dimensions."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise EventValidationError(
                f"sensor dimensions must be positive, got {self.width}x{self.height}"
            )

    @property
    def n_pixels(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class EventStream:
    """Time-ordered event arrays with their sensor geometry.

    Invariants: t non-decreasing and >= 0, coordinates within
    [0, width) x [0, height), polarity in {-1, +1}.
    """

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    polarity: np.ndarray
    geometry: SensorGeometry

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.polarity) == n):
            raise EventValidationError("event arrays must have equal length")
        if n == 0:
            return
        if not np.all(np.isfinite(self.x)) or not np.all(np.isfinite(self.y)):
            raise EventValidationError("event coordinates must be finite")
        if np.any(self.t < 0):
            raise EventValidationError("timestamps must be non-negative")
        if np.any(np.diff(self.t) < 0):
            raise EventValidationError("events must be sorted by timestamp")
        if (
            np.any(self.x < 0)
            or np.any(self.x >= self.geometry.width)
            or np.any(self.y < 0)
            or np.any(self.y >= self.geometry.height)
        ):
            raise EventValidationError("event coordinates outside sensor geometry")
        if not np.all(np.isin(self.polarity, (-1, 1))):
            raise EventValidationError("polarity must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.t)

    def replace_events(
        self, x: np.ndarray, y: np.ndarray, t: np.ndarray, polarity: np.ndarray
    ) -> "EventStream":
        return EventStream(x, y, t, polarity, self.geometry)


@dataclass(frozen=True)
class EventBatch:
    """Finite time window of events with batch-local timestamps in [0, tau].

    ``t_start`` is the absolute start of the window, so an event's absolute
    time is ``t_start + t``.
    """

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    tau: float
    geometry: SensorGeometry
    t_start: float = 0.0

    def __post_init__(self):
        if self.tau <= 0:
            raise EventValidationError("batch duration tau must be positive")
        if len(self.t) and (np.any(self.t < 0) or np.any(self.t > self.tau)):
            raise EventValidationError("batch timestamps must lie in [0, tau]")

    @property
    def n(self) -> int:
        return len(self.t)

    @property
    def t_end(self) -> float:
        return self.t_start + self.tau


def _empty_stream(geometry: SensorGeometry) -> EventStream:
    z = np.empty(0, dtype=np.float64)
    return EventStream(z, z.copy(), z.copy(), np.empty(0, dtype=np.int8), geometry)


def _from_columns(t_us, x, y, p, geometry: SensorGeometry) -> EventStream:
    t = np.asarray(t_us, dtype=np.float64) * 1e-6
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    p = np.asarray(p, dtype=np.int8)
    order = np.argsort(t, kind="stable")
    return EventStream(x[order], y[order], t[order], p[order], geometry)


def _parse_csv_header(line: str) -> SensorGeometry:
    # expected: "# width=<W> height=<H>"
    fields = {}
    for token in line.lstrip("#").split():
        if "=" in token:
            key, _, value = token.partition("=")
            fields[key] = value
    try:
        return SensorGeometry(int(fields["width"]), int(fields["height"]))
    except (KeyError, ValueError) as exc:
        raise EventFormatError(f"bad CSV header line: {line!r}") from exc


def parse_event_csv(data: bytes) -> EventStream:
    """Parse the CSV event format: header ``# width=W height=H``, rows ``t_us,x,y,p``."""
    lines = data.decode("utf-8").splitlines()
    geometry = None
    t_us, xs, ys, ps = [], [], [], []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if geometry is None and "width" in line:
                geometry = _parse_csv_header(line)
            continue
        if geometry is None:
            raise EventFormatError("missing geometry header before first event row")
        parts = line.split(",")
        if len(parts) != 4:
            raise EventFormatError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        try:
            tu = float(parts[0])
            x = float(parts[1])
            y = float(parts[2])
            p = int(parts[3])
        except ValueError as exc:
            raise EventFormatError(f"line {lineno}: {exc}") from exc
        if tu < 0:
            raise EventFormatError(f"line {lineno}: negative timestamp")
        t_us.append(tu)
        xs.append(x)
        ys.append(y)
        ps.append(p)
    if geometry is None:
        raise EventFormatError("missing geometry header")
    return _from_columns(t_us, xs, ys, ps, geometry)


def parse_event_bin(data: bytes) -> EventStream:
    """Parse the BIN event format (magic EVD1, little-endian header + records)."""
    header = struct.calcsize("<4sIIQ")
    if len(data) < header:
        raise EventFormatError("truncated BIN header")
    magic, width, height, count = struct.unpack_from("<4sIIQ", data, 0)
    if magic != BIN_MAGIC:
        raise EventFormatError(f"bad magic {magic!r}")
    record = np.dtype(
        [("t_us", "<u8"), ("x", "<f4"), ("y", "<f4"), ("p", "i1")]
    )
    expected = header + count * record.itemsize
    if len(data) < expected:
        raise EventFormatError(
            f"truncated BIN body: expected {count} records"
        )
    records = np.frombuffer(data, dtype=record, count=count, offset=header)
    return _from_columns(
        records["t_us"], records["x"], records["y"], records["p"],
        SensorGeometry(int(width), int(height)),
    )


def parse_event_file(data: bytes, format_tag: str) -> EventStream:
    """Parse an event file body given its format tag ('csv' or 'bin')."""
    if format_tag == "csv":
        return parse_event_csv(data)
    if format_tag == "bin":
        return parse_event_bin(data)
    raise ValueError(f"unknown event format {format_tag!r}")


def load_event_file(path: str | Path) -> EventStream:
    """Load an event file, inferring the format from its extension."""
    path = Path(path)
    tag = "bin" if path.suffix.lower() == ".bin" else "csv"
    return parse_event_file(path.read_bytes(), tag)


def write_event_csv(stream: EventStream, path: str | Path) -> None:
    g = stream.geometry
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# width={g.width} height={g.height}\n")
        for i in range(stream.n):
            t_us = int(round(stream.t[i] * 1e6))
            fh.write(
                f"{t_us},{stream.x[i]:.6f},{stream.y[i]:.6f},{int(stream.polarity[i])}\n"
            )


def write_event_bin(stream: EventStream, path: str | Path) -> None:
    g = stream.geometry
    record = np.dtype([("t_us", "<u8"), ("x", "<f4"), ("y", "<f4"), ("p", "i1")])
    body = np.empty(stream.n, dtype=record)
    body["t_us"] = np.round(stream.t * 1e6).astype(np.uint64)
    body["x"] = stream.x
    body["y"] = stream.y
    body["p"] = stream.polarity
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIIQ", BIN_MAGIC, g.width, g.height, stream.n))
        fh.write(body.tobytes())


def write_ground_truth_csv(samples: Iterable[tuple[float, float]], path: str | Path) -> None:
    """Write ground-truth divergence samples as ``t_s,divergence`` rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# t_s,divergence\n")
        for t, d in samples:
            fh.write(f"{t:.9f},{d:.9f}\n")


def read_divergence_csv(path: str | Path) -> np.ndarray:
    """Read a ``t_s,divergence`` CSV (comment lines prefixed '#') into an (n, 2) array."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (IndexError, ValueError) as exc:
                raise EventFormatError(f"line {lineno}: {exc}") from exc
    return np.asarray(rows, dtype=np.float64).reshape(-1, 2)


def pixel_counts(stream: EventStream) -> np.ndarray:
    """Per-pixel event counts (height x width), binned by floor coordinates."""
    g = stream.geometry
    counts = np.zeros((g.height, g.width), dtype=np.int64)
    if stream.n:
        ix = np.floor(stream.x).astype(np.intp)
        iy = np.floor(stream.y).astype(np.intp)
        np.add.at(counts, (iy, ix), 1)
    return counts


def remove_hot_pixels(stream: EventStream, k: float = 10.0) -> EventStream:
    """Drop all events on pixels whose count exceeds median + k*MAD of nonzero counts."""
    if k <= 0:
        raise ValueError("k must be positive")
    if stream.n == 0:
        return stream
    counts = pixel_counts(stream)
    nonzero = counts[counts > 0].astype(np.float64)
    med = np.median(nonzero)
    mad = np.median(np.abs(nonzero - med))
    threshold = med + k * mad
    hot = counts > threshold
    ix = np.floor(stream.x).astype(np.intp)
    iy = np.floor(stream.y).astype(np.intp)
    keep = ~hot[iy, ix]
    return stream.replace_events(
        stream.x[keep], stream.y[keep], stream.t[keep], stream.polarity[keep]
    )


def rescale_events(stream: EventStream, target: SensorGeometry) -> EventStream:
    """Scale event coordinates onto a new sensor grid; timestamps unchanged."""
    g = stream.geometry
    sx = target.width / g.width
    sy = target.height / g.height
    x = stream.x * sx
    y = stream.y * sy
    # float rounding can push a near-boundary coordinate to exactly target_dim
    x = np.minimum(x, np.nextafter(float(target.width), 0.0))
    y = np.minimum(y, np.nextafter(float(target.height), 0.0))
    return EventStream(x, y, stream.t.copy(), stream.polarity.copy(), target)


def subsample_events(stream: EventStream, keep_fraction: float, seed: int) -> EventStream:
    """Keep each event independently with probability ``keep_fraction`` (seeded)."""
    if not 0 < keep_fraction <= 1:
        raise ValueError("keep_fraction must be in (0, 1]")
    if keep_fraction == 1.0 or stream.n == 0:
        return stream
    rng = np.random.default_rng(seed)
    keep = rng.random(stream.n) < keep_fraction
    return stream.replace_events(
        stream.x[keep], stream.y[keep], stream.t[keep], stream.polarity[keep]
    )


def batch_stream(stream: EventStream, tau: float) -> list[EventBatch]:
    """Split a stream into consecutive windows [k*tau, (k+1)*tau) anchored at t=0.

    Batch-local timestamps subtract the window start (not the first event
    time), so samples land on a fixed absolute grid. Windows inside the
    stream's span with no events are returned as empty batches.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if stream.n == 0:
        return []
    k0 = int(np.floor(stream.t[0] / tau))
    k1 = int(np.floor(stream.t[-1] / tau))
    batches = []
    for k in range(k0, k1 + 1):
        start = k * tau
        lo = np.searchsorted(stream.t, start, side="left")
        hi = np.searchsorted(stream.t, start + tau, side="left")
        t_local = np.minimum(stream.t[lo:hi] - start, tau)
        batches.append(
            EventBatch(
                stream.x[lo:hi].copy(),
                stream.y[lo:hi].copy(),
                t_local,
                tau,
                stream.geometry,
                t_start=start,
            )
        )
    return batches
