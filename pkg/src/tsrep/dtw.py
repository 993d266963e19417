"""DTW distance with optional Sakoe-Chiba band.

The kernel is selected at import time: the compiled extension when it
built, otherwise the pure-Python fallback (``tsrep.dtw.KERNEL`` names the
active one). Every evaluation increments a process-wide counter so tests
and the service can assert that cached paths perform no DTW work.

Definition: minimum over monotone warping paths (match / insert / delete
steps, endpoints aligned) of the summed |a_i - b_j| along the path. No
path-length normalization. Not a metric: the triangle inequality does not
hold in general.
"""

from __future__ import annotations

import threading

import numpy as np

from .errors import BandTooNarrow, EmptySequence, TsrepError

try:  # pragma: no cover - exercised via KERNEL value
    from . import _dtw_ext as _kernel
except ImportError:  # pragma: no cover
    from . import _dtw_py as _kernel

#: name of the active kernel: "cython" or "python"
KERNEL: str = _kernel.KERNEL_NAME

_count_lock = threading.Lock()
_evals = 0


def eval_count() -> int:
    """Total DTW evaluations since process start (or last reset)."""
    return _evals


def reset_eval_count() -> None:
    global _evals
    with _count_lock:
        _evals = 0


def _add_evals(n: int) -> None:
    global _evals
    with _count_lock:
        _evals += n


def _as_seq(x, side: str) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise TsrepError(f"sequence {side} must be 1-d")
    if arr.size == 0:
        raise EmptySequence(f"sequence {side} is empty")
    return arr


def _check_window(window: int | None, la: int, lb: int) -> int:
    if window is None:
        return -1
    if window < 0:
        raise TsrepError(f"window must be >= 0, got {window}")
    if window < abs(la - lb):
        raise BandTooNarrow(window, la, lb)
    return int(window)


def dtw_distance(a, b, window: int | None = None) -> float:
    """DTW distance between two value sequences.

    ``window`` restricts alignment to |i - j| <= window; it must be at
    least the length difference, otherwise no path exists.
    """
    a = _as_seq(a, "a")
    b = _as_seq(b, "b")
    w = _check_window(window, a.size, b.size)
    _add_evals(1)
    return float(_kernel.dtw_one(a, b, w))


def dtw_cross(A, B, window: int | None = None) -> np.ndarray:
    """All-pairs distances between two batches of equal-length sequences.

    A is (na, la), B is (nb, lb); returns (na, nb). Bulk variant of
    :func:`dtw_distance` used by the benchmark and the acceptance suite.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2:
        raise TsrepError("batches must be 2-d arrays")
    if A.shape[1] == 0 or B.shape[1] == 0:
        raise EmptySequence("batch contains empty sequences")
    w = _check_window(window, A.shape[1], B.shape[1])
    out = np.empty(A.shape[0] * B.shape[0], dtype=np.float64)
    _kernel.dtw_cross(A, B, w, out)
    _add_evals(out.size)
    return out.reshape(A.shape[0], B.shape[0])
