"""Segment-wise four-extreme-point downsampling (M4).

The time range of a series is split into equal-width segments; each
non-empty segment contributes its first point, last point, maximum-value
point, and minimum-value point (first occurrence on value ties). The
result preserves endpoints and global extremes, never synthesizes values,
and is at most 4x the segment count in size.

Used both to shrink series before DTW and for display-resolution
downsampling (one segment per pixel column).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import EmptySeries, TsrepError
from .model import TimeSeries, _freeze


@dataclass(frozen=True, eq=False)
class M4Sample:
    """Reduced point sequence of one series."""

    series_id: str
    segments: int
    t: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _freeze(self.t, np.int64))
        object.__setattr__(self, "v", _freeze(self.v, np.float64))
        if self.t.size != self.v.size:
            raise TsrepError("timestamps and values must be equal length")
        if self.t.size > 1 and not (np.diff(self.t) > 0).all():
            raise TsrepError("sample timestamps not strictly increasing")

    def __len__(self) -> int:
        return int(self.t.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, M4Sample):
            return NotImplemented
        return (
            self.series_id == other.series_id
            and self.segments == other.segments
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.v, other.v)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "series_id": self.series_id,
            "segments": self.segments,
            "points": [{"t": t, "v": v} for t, v in zip(self.t.tolist(), self.v.tolist())],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "M4Sample":
        pts = d["points"]
        return cls(
            series_id=str(d["series_id"]),
            segments=int(d["segments"]),
            t=np.array([p["t"] for p in pts], dtype=np.int64),
            v=np.array([p["v"] for p in pts], dtype=np.float64),
        )


def _segment_indices(t: np.ndarray, segments: int) -> np.ndarray:
    """Map each timestamp to its segment in [0, segments): half-open
    equal-width intervals over [t_first, t_last], last interval closed."""
    t0 = int(t[0])
    span = int(t[-1]) - t0
    if span == 0:
        return np.zeros(t.size, dtype=np.int64)
    rel = t.astype(np.int64) - t0
    if span <= (2**62) // segments:
        seg = (rel * segments) // span
    else:  # int64 overflow guard for extreme tick ranges
        seg = np.array([(int(r) * segments) // span for r in rel.tolist()], dtype=np.int64)
    return np.minimum(seg, segments - 1)


def m4_sample(series: TimeSeries, segments: int) -> M4Sample:
    """Reduce a series to at most ``4 * segments`` of its own points."""
    if segments < 1:
        raise TsrepError(f"segments must be >= 1, got {segments}")
    n = len(series)
    if n == 0:
        raise EmptySeries(series.name)

    t, v = series.t, series.v
    seg = _segment_indices(t, segments)
    # seg is sorted; locate segment boundaries in one pass
    bounds = np.searchsorted(seg, np.arange(segments + 1))
    picks: list[int] = []
    for s in range(segments):
        lo, hi = int(bounds[s]), int(bounds[s + 1])
        if lo == hi:
            continue
        window = v[lo:hi]
        # argmax/argmin return the first occurrence on ties
        picks.extend((lo, hi - 1, lo + int(np.argmax(window)), lo + int(np.argmin(window))))
    idx = np.unique(np.array(picks, dtype=np.int64))
    return M4Sample(series_id=series.id, segments=segments, t=t[idx], v=v[idx])


def display_downsample(series: TimeSeries, width_px: int) -> M4Sample:
    """Downsample for rendering: one segment per pixel column."""
    if width_px < 1:
        raise TsrepError(f"width_px must be >= 1, got {width_px}")
    return m4_sample(series, width_px)
