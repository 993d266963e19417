"""Pairwise DTW distance matrix over a dataset's sampled series.

Built once per (dataset, parameter fingerprint) and cached; slider-driven
re-selection then runs entirely on the cached matrix. The build
parallelizes over the upper triangle with threads (the compiled kernel
releases the GIL); every cell is independent, so the result is identical
to sequential execution.
"""

from __future__ import annotations

import io
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np

from . import dtw
from .errors import MatrixBuildError, TsrepError
from .m4 import m4_sample
from .model import Dataset, SelectionParams, _freeze

ProgressSink = Callable[[float], None]


def params_fingerprint(segments: int, dtw_window: int | None, normalized: bool) -> str:
    """Human-readable key for the similarity-pipeline parameters."""
    win = "none" if dtw_window is None else str(dtw_window)
    return f"seg{segments}-win{win}-norm{int(normalized)}"


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric n x n matrix of pairwise DTW distances, zero diagonal."""

    dataset_id: str
    params_fingerprint: str
    order: tuple[str, ...]
    d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "d", _freeze(self.d, np.float64))
        n = len(self.order)
        if self.d.shape != (n, n):
            raise TsrepError(f"matrix shape {self.d.shape} != ({n}, {n})")
        if n and not np.isfinite(self.d).all():
            raise TsrepError("matrix contains non-finite entries")
        if n and (self.d < 0).any():
            raise TsrepError("matrix contains negative entries")
        if not np.array_equal(self.d, self.d.T):
            raise TsrepError("matrix is not symmetric")
        if np.any(np.diag(self.d) != 0.0):
            raise TsrepError("matrix diagonal is not zero")

    @property
    def n(self) -> int:
        return len(self.order)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return (
            self.dataset_id == other.dataset_id
            and self.params_fingerprint == other.params_fingerprint
            and self.order == other.order
            and np.array_equal(self.d, other.d)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset_id": self.dataset_id,
            "params_fingerprint": self.params_fingerprint,
            "order": list(self.order),
            "d": [row.tolist() for row in self.d],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "DistanceMatrix":
        return cls(
            dataset_id=str(d["dataset_id"]),
            params_fingerprint=str(d["params_fingerprint"]),
            order=tuple(str(x) for x in d["order"]),
            d=np.array(d["d"], dtype=np.float64),
        )

    def to_csv(self) -> str:
        """Matrix as CSV: header row of series ids, one row per series."""
        buf = io.StringIO()
        buf.write("series," + ",".join(self.order) + "\n")
        for sid, row in zip(self.order, self.d):
            buf.write(sid + "," + ",".join(repr(x) for x in row.tolist()) + "\n")
        return buf.getvalue()


def build_matrix(
    dataset: Dataset,
    params: SelectionParams,
    progress: ProgressSink | None = None,
    workers: int | None = None,
) -> DistanceMatrix:
    """Compute all pairwise DTW distances between sampled series.

    Each series is reduced with ``params.segments`` segments first; DTW
    then runs on the sample value sequences. ``progress`` receives
    monotone completion fractions ending at 1.0.
    """
    n = dataset.n
    try:
        samples = [m4_sample(s, params.segments).v for s in dataset.series]
    except TsrepError as exc:
        raise MatrixBuildError(f"sampling failed: {exc}") from exc

    d = np.zeros((n, n), dtype=np.float64)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = len(pairs)
    if total == 0:
        if progress is not None:
            progress(1.0)
        fp = params_fingerprint(params.segments, params.dtw_window, dataset.provenance.normalized)
        return DistanceMatrix(
            dataset_id=dataset.id,
            params_fingerprint=fp,
            order=tuple(s.id for s in dataset.series),
            d=d,
        )

    done = 0
    reported = 0.0
    lock = threading.Lock()

    def run_chunk(chunk: list[tuple[int, int]]) -> None:
        nonlocal done, reported
        for i, j in chunk:
            try:
                d[i, j] = dtw.dtw_distance(samples[i], samples[j], params.dtw_window)
            except TsrepError as exc:
                raise MatrixBuildError(
                    f"DTW failed for pair ({dataset.series[i].id}, "
                    f"{dataset.series[j].id}): {exc}"
                ) from exc
        if progress is not None:
            with lock:
                done += len(chunk)
                frac = done / total
                if frac > reported:
                    reported = frac
                    progress(frac)

    chunk_size = max(1, total // 64)
    chunks = [pairs[i : i + chunk_size] for i in range(0, total, chunk_size)]
    if workers is None or workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for future in [pool.submit(run_chunk, c) for c in chunks]:
                future.result()
    else:
        for c in chunks:
            run_chunk(c)

    d = d + d.T  # symmetric fill; diagonal stays zero
    fp = params_fingerprint(params.segments, params.dtw_window, dataset.provenance.normalized)
    return DistanceMatrix(
        dataset_id=dataset.id,
        params_fingerprint=fp,
        order=tuple(s.id for s in dataset.series),
        d=d,
    )
