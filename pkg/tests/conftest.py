from __future__ import annotations

import numpy as np
import pytest

from tsrep.model import SeriesStats, TimeSeries


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_series(name="s", t=None, v=None, sid=None) -> TimeSeries:
    """TimeSeries from raw point data, stats derived."""
    t = np.asarray(t, dtype=np.int64)
    v = np.asarray(v, dtype=np.float64)
    return TimeSeries(
        id=sid or f"test:{name}",
        name=name,
        t=t,
        v=v,
        stats=SeriesStats.from_values(v),
    )


def random_series(rng, length, name="s") -> TimeSeries:
    """Irregularly spaced random series."""
    steps = rng.integers(1, 1000, size=length)
    t = np.cumsum(steps) + int(rng.integers(-(10**6), 10**6))
    v = rng.normal(size=length)
    return make_series(name=name, t=t, v=v)


def random_sym_matrix(rng, n) -> np.ndarray:
    """Random symmetric non-negative matrix with zero diagonal."""
    m = rng.uniform(0.1, 10.0, size=(n, n))
    m = (m + m.T) / 2.0
    np.fill_diagonal(m, 0.0)
    return m


def float_cells(values) -> list[str]:
    """Round-trippable text cells from an array of floats."""
    return [repr(float(v)) for v in values]


def csv_bytes(columns: dict[str, list], delimiter=",") -> bytes:
    """CSV from column lists; None cells become empty."""
    names = list(columns)
    length = max(len(c) for c in columns.values())
    lines = [delimiter.join(names)]
    for i in range(length):
        cells = []
        for name in names:
            col = columns[name]
            cell = col[i] if i < len(col) else None
            cells.append("" if cell is None else str(cell))
        lines.append(delimiter.join(cells))
    return ("\n".join(lines) + "\n").encode()
