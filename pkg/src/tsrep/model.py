"""Core domain types: series, datasets, selection parameters.

All types are immutable after construction (arrays are marked read-only),
so they can be shared freely across threads. JSON field names are
snake_case; timestamps serialize as integers, values as doubles.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping

import numpy as np

from .errors import KOutOfRange, TsrepError


@dataclass(frozen=True)
class TimePoint:
    """One observation: integer timestamp tick and a finite value."""

    t: int
    v: float


@dataclass(frozen=True)
class SeriesStats:
    """Raw-value statistics captured before normalization."""

    mean: float
    std: float
    min: float
    max: float
    count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "count": self.count,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SeriesStats":
        return cls(
            mean=float(d["mean"]),
            std=float(d["std"]),
            min=float(d["min"]),
            max=float(d["max"]),
            count=int(d["count"]),
        )

    @classmethod
    def from_values(cls, values: np.ndarray) -> "SeriesStats":
        # population std, matching the normalization convention
        return cls(
            mean=float(values.mean()),
            std=float(values.std()),
            min=float(values.min()),
            max=float(values.max()),
            count=int(values.size),
        )


def _freeze(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=dtype)
    if out is arr and arr.flags.writeable:
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One named univariate series; the unit of selection.

    Timestamps are strictly increasing int64 ticks; values are finite
    float64. `stats` describes the raw (pre-normalization) values.
    """

    id: str
    name: str
    t: np.ndarray
    v: np.ndarray
    stats: SeriesStats

    def __post_init__(self):
        object.__setattr__(self, "t", _freeze(self.t, np.int64))
        object.__setattr__(self, "v", _freeze(self.v, np.float64))
        if self.t.ndim != 1 or self.v.ndim != 1 or self.t.size != self.v.size:
            raise TsrepError("timestamps and values must be 1-d and equal length")
        if self.t.size == 0:
            raise TsrepError(f"series {self.name!r} has no points")
        if self.t.size > 1 and not (np.diff(self.t) > 0).all():
            raise TsrepError(f"series {self.name!r} timestamps not strictly increasing")
        if not np.isfinite(self.v).all():
            raise TsrepError(f"series {self.name!r} contains non-finite values")

    def __len__(self) -> int:
        return int(self.t.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.id == other.id
            and self.name == other.name
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.v, other.v)
            and self.stats == other.stats
        )

    def points(self) -> Iterator[TimePoint]:
        for t, v in zip(self.t.tolist(), self.v.tolist()):
            yield TimePoint(t, v)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "points": [{"t": t, "v": v} for t, v in zip(self.t.tolist(), self.v.tolist())],
            "stats": self.stats.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TimeSeries":
        pts = d["points"]
        return cls(
            id=str(d["id"]),
            name=str(d["name"]),
            t=np.array([p["t"] for p in pts], dtype=np.int64),
            v=np.array([p["v"] for p in pts], dtype=np.float64),
            stats=SeriesStats.from_dict(d["stats"]),
        )


@dataclass(frozen=True)
class CategoricalColumn:
    """A column excluded from selection, with its distinct-value count."""

    name: str
    distinct_count: int

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "distinct_count": self.distinct_count}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CategoricalColumn":
        return cls(name=str(d["name"]), distinct_count=int(d["distinct_count"]))


@dataclass(frozen=True)
class Provenance:
    """Where a dataset came from and what happened on the way in."""

    source: str
    rows: int
    warnings: tuple[str, ...]
    normalized: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "rows": self.rows,
            "warnings": list(self.warnings),
            "normalized": self.normalized,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Provenance":
        return cls(
            source=str(d["source"]),
            rows=int(d["rows"]),
            warnings=tuple(str(w) for w in d["warnings"]),
            normalized=bool(d["normalized"]),
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable collection of series sharing one ingestion source."""

    id: str
    series: tuple[TimeSeries, ...]
    categorical_columns: tuple[CategoricalColumn, ...]
    provenance: Provenance

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        object.__setattr__(
            self, "categorical_columns", tuple(self.categorical_columns)
        )
        if len(self.series) < 1:
            raise TsrepError("dataset must contain at least one series")
        names = [s.name for s in self.series]
        if len(set(names)) != len(names):
            raise TsrepError("series names must be unique within a dataset")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.id == other.id
            and self.series == other.series
            and self.categorical_columns == other.categorical_columns
            and self.provenance == other.provenance
        )

    @property
    def n(self) -> int:
        return len(self.series)

    def names(self) -> list[str]:
        return [s.name for s in self.series]

    def get(self, name: str) -> TimeSeries | None:
        for s in self.series:
            if s.name == name:
                return s
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "series": [s.to_dict() for s in self.series],
            "categorical_columns": [c.to_dict() for c in self.categorical_columns],
            "provenance": self.provenance.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Dataset":
        return cls(
            id=str(d["id"]),
            series=tuple(TimeSeries.from_dict(s) for s in d["series"]),
            categorical_columns=tuple(
                CategoricalColumn.from_dict(c) for c in d["categorical_columns"]
            ),
            provenance=Provenance.from_dict(d["provenance"]),
        )


DEFAULT_SEGMENTS = 25


@dataclass(frozen=True)
class SelectionParams:
    """Selection knobs: k representatives, diversity weight alpha,
    segment count for the similarity sampling, optional DTW band."""

    k: int
    alpha: float
    segments: int = DEFAULT_SEGMENTS
    dtw_window: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise KOutOfRange(self.k, 0)
        if not (0.0 <= self.alpha <= 1.0):
            raise TsrepError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.segments < 1:
            raise TsrepError(f"segments must be >= 1, got {self.segments}")
        if self.dtw_window is not None and self.dtw_window < 0:
            raise TsrepError(f"dtw_window must be >= 0, got {self.dtw_window}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "alpha": self.alpha,
            "segments": self.segments,
            "dtw_window": self.dtw_window,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SelectionParams":
        window = d.get("dtw_window")
        return cls(
            k=int(d["k"]),
            alpha=float(d["alpha"]),
            segments=int(d.get("segments", DEFAULT_SEGMENTS)),
            dtw_window=None if window is None else int(window),
        )


def canonical_json(obj: Any) -> str:
    """Stable serialization used for fingerprints and byte-identity checks."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def dataset_fingerprint(source_bytes: bytes, config: Mapping[str, Any]) -> str:
    """Content-addressed dataset id over source bytes and preprocessing config.

    Identical (bytes, config) always map to the same id; any difference in
    either changes it. The config mapping is canonicalized, so key order
    does not matter.
    """
    if not source_bytes:
        raise TsrepError("cannot fingerprint an empty source")
    h = hashlib.sha256()
    h.update(len(source_bytes).to_bytes(8, "little"))
    h.update(source_bytes)
    h.update(canonical_json(dict(config)).encode("utf-8"))
    return h.hexdigest()


def series_id(dataset_id: str, name: str) -> str:
    """Stable series identifier: dataset prefix + column name."""
    return f"{dataset_id[:12]}:{name}"
