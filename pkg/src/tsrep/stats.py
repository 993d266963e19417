"""Box-plot statistics for the summary endpoint."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import TsrepError


@dataclass(frozen=True)
class BoxSummary:
    """Five-number summary plus outlier count (1.5 IQR fences)."""

    min: float
    q1: float
    median: float
    q3: float
    max: float
    outlier_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "min": self.min,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.max,
            "outlier_count": self.outlier_count,
        }


def box_summary(values: np.ndarray) -> BoxSummary:
    """Quartiles by linear interpolation between order statistics."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise TsrepError("cannot summarize an empty value array")
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    lo = q1 - 1.5 * iqr
    hi = q3 + 1.5 * iqr
    outliers = int(np.count_nonzero((values < lo) | (values > hi)))
    return BoxSummary(
        min=float(values.min()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        max=float(values.max()),
        outlier_count=outliers,
    )
