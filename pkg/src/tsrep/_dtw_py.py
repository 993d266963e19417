"""Pure-Python DTW kernel, used when the compiled extension is unavailable.

Same contract and same rolling-row banded DP as the compiled kernel;
roughly two orders of magnitude slower on long sequences.
"""

from __future__ import annotations

from math import inf

KERNEL_NAME = "python"


def dtw_one(a, b, window: int) -> float:
    a = a.tolist() if hasattr(a, "tolist") else list(a)
    b = b.tolist() if hasattr(b, "tolist") else list(b)
    n, m = len(a), len(b)
    w = (n + m) if window < 0 else window
    prev = [inf] * m
    curr = [inf] * m
    for i in range(n):
        jlo = max(0, i - w)
        jhi = min(m - 1, i + w)
        if jlo > 0:
            curr[jlo - 1] = inf
        ai = a[i]
        for j in range(jlo, jhi + 1):
            cost = abs(ai - b[j])
            if i == 0 and j == 0:
                best = 0.0
            else:
                best = inf
                if i > 0:
                    if prev[j] < best:
                        best = prev[j]
                    if j > 0 and prev[j - 1] < best:
                        best = prev[j - 1]
                if j > jlo and curr[j - 1] < best:
                    best = curr[j - 1]
            curr[j] = cost + best
        if jhi + 1 < m:
            curr[jhi + 1] = inf
        prev, curr = curr, prev
    return prev[m - 1]


def dtw_cross(A, B, window: int, out) -> None:
    nb = B.shape[0]
    rows_a = [row.tolist() for row in A]
    rows_b = [row.tolist() for row in B]
    for ia, a in enumerate(rows_a):
        base = ia * nb
        for ib, b in enumerate(rows_b):
            out[base + ib] = dtw_one(a, b, window)
