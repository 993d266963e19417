"""Benchmark: compiled DTW kernel vs pure-Python fallback.

Usage:
    python benchmarks/bench_dtw.py [--quick]

Times the banded DP on single pairs across sequence lengths, then an
end-to-end distance-matrix build with the active kernel.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tsrep import _dtw_py
from tsrep import dtw
from tsrep.matrix import build_matrix
from tsrep.model import Dataset, Provenance, SelectionParams, SeriesStats, TimeSeries

try:
    from tsrep import _dtw_ext
except ImportError:
    _dtw_ext = None


def time_kernel(kernel, pairs, window, repeats) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for a, b in pairs:
            kernel.dtw_one(a, b, window)
        best = min(best, time.perf_counter() - t0)
    return best / len(pairs)


def bench_single_pairs(quick: bool) -> None:
    rng = np.random.default_rng(0)
    lengths = [25, 50, 100] if quick else [25, 50, 100, 200, 400]
    n_pairs = 5 if quick else 20
    print(f"{'length':>8} {'window':>8} {'python':>12} {'cython':>12} {'speedup':>9}")
    for length in lengths:
        for window in (-1, max(1, length // 10)):
            pairs = [
                (rng.normal(size=length), rng.normal(size=length))
                for _ in range(n_pairs)
            ]
            t_py = time_kernel(_dtw_py, pairs, window, repeats=2)
            row = f"{length:>8} {('none' if window < 0 else window):>8} {t_py * 1e6:>10.1f}us"
            if _dtw_ext is not None:
                t_cy = time_kernel(_dtw_ext, pairs, window, repeats=3)
                row += f" {t_cy * 1e6:>10.1f}us {t_py / t_cy:>8.1f}x"
            else:
                row += f" {'n/a':>12} {'n/a':>9}"
            print(row)


def synthetic_dataset(n_series, length) -> Dataset:
    rng = np.random.default_rng(1)
    t = np.arange(length, dtype=np.int64)
    series = []
    for i in range(n_series):
        v = np.sin(t / rng.uniform(50, 500) + rng.uniform(0, 6.28)) + rng.normal(
            size=length
        ) * 0.1
        series.append(
            TimeSeries(
                id=f"{'b' * 12}:s{i}",
                name=f"s{i}",
                t=t,
                v=v,
                stats=SeriesStats.from_values(v),
            )
        )
    return Dataset(
        id="b" * 64,
        series=tuple(series),
        categorical_columns=(),
        provenance=Provenance(
            source="bench", rows=length, warnings=(), normalized=True
        ),
    )


def bench_matrix_build(quick: bool) -> None:
    n_series = 30 if quick else 100
    length = 2000 if quick else 10_000
    ds = synthetic_dataset(n_series, length)
    params = SelectionParams(k=5, alpha=0.5)
    t0 = time.perf_counter()
    build_matrix(ds, params)
    dt = time.perf_counter() - t0
    n_pairs = n_series * (n_series - 1) // 2
    print(
        f"\nmatrix build ({dtw.KERNEL} kernel): {n_series} series x {length} points, "
        f"{n_pairs} DTW pairs in {dt:.2f}s"
    )


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    args = parser.parse_args()
    print(f"active kernel: {dtw.KERNEL}")
    if _dtw_ext is None:
        print("compiled extension not built; python-only timings")
    bench_single_pairs(args.quick)
    bench_matrix_build(args.quick)
