"""CSV ingestion: parsing, column type classification, series construction.

The pipeline turns a raw CSV byte stream into an immutable
:class:`~tsrep.model.Dataset`:

1. ``parse_csv`` — RFC-4180-style parsing into a cell grid of optional
   strings (empty cells become missing).
2. ``classify_columns`` — numeric vs categorical split by the fraction of
   cells that parse as finite numbers.
3. ``build_series`` — per numeric column: pair timestamps with values,
   drop missing points, sort, collapse duplicate timestamps, optionally
   z-normalize.

Timestamps are stored as int64 ticks. Integer inputs are used as-is;
fractional inputs are scaled to microsecond ticks; ISO-8601 inputs become
epoch milliseconds. Rows whose time cell is missing or unparseable are
dropped and counted.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Mapping

import numpy as np

from .errors import (
    DuplicateColumn,
    EmptySource,
    HeaderMissing,
    IngestError,
    NoNumericColumns,
    NoUsableTimestamps,
    RowOverflow,
)
from .model import (
    CategoricalColumn,
    Dataset,
    Provenance,
    SeriesStats,
    TimeSeries,
    dataset_fingerprint,
    series_id,
)

#: scale applied to fractional numeric timestamps to obtain integer ticks
FRACTIONAL_TICK_SCALE = 1_000_000

MISSING_POLICIES = ("drop_point",)


@dataclass(frozen=True)
class PreprocessConfig:
    """Knobs for the ingestion pipeline.

    ``time_column=None`` means a synthetic 0..N-1 index is used.
    ``numeric_threshold`` is the minimum fraction of non-missing cells that
    must parse as finite numbers for a column to count as numeric.
    """

    time_column: str | None = None
    numeric_threshold: float = 0.95
    normalize: bool = True
    missing_policy: str = "drop_point"
    delimiter: str = ","

    def __post_init__(self):
        if not (0.0 < self.numeric_threshold <= 1.0):
            raise IngestError(
                f"numeric_threshold must be in (0, 1], got {self.numeric_threshold}"
            )
        if self.missing_policy not in MISSING_POLICIES:
            raise IngestError(f"unknown missing_policy {self.missing_policy!r}")
        if len(self.delimiter) != 1:
            raise IngestError("delimiter must be a single character")

    def to_dict(self) -> dict[str, Any]:
        return {
            "time_column": self.time_column,
            "numeric_threshold": self.numeric_threshold,
            "normalize": self.normalize,
            "missing_policy": self.missing_policy,
            "delimiter": self.delimiter,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PreprocessConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise IngestError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {k: d[k] for k in known if k in d}
        return cls(**kwargs)


@dataclass
class IngestReport:
    """What happened during ingestion; one per dataset."""

    rows_read: int = 0
    columns_numeric: list[str] = field(default_factory=list)
    columns_categorical: list[str] = field(default_factory=list)
    missing_cells_dropped: dict[str, int] = field(default_factory=dict)
    duplicate_timestamps_collapsed: int = 0
    nonmonotone_rows_sorted: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows_read": self.rows_read,
            "columns_numeric": list(self.columns_numeric),
            "columns_categorical": list(self.columns_categorical),
            "missing_cells_dropped": dict(self.missing_cells_dropped),
            "duplicate_timestamps_collapsed": self.duplicate_timestamps_collapsed,
            "nonmonotone_rows_sorted": self.nonmonotone_rows_sorted,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "IngestReport":
        return cls(
            rows_read=int(d["rows_read"]),
            columns_numeric=list(d["columns_numeric"]),
            columns_categorical=list(d["columns_categorical"]),
            missing_cells_dropped={k: int(v) for k, v in d["missing_cells_dropped"].items()},
            duplicate_timestamps_collapsed=int(d["duplicate_timestamps_collapsed"]),
            nonmonotone_rows_sorted=bool(d["nonmonotone_rows_sorted"]),
        )


@dataclass(frozen=True)
class ParsedTable:
    """Cell grid of optional strings plus the header row."""

    header: tuple[str, ...]
    rows: tuple[tuple[str | None, ...], ...]

    def column(self, name: str) -> list[str | None]:
        idx = self.header.index(name)
        return [row[idx] for row in self.rows]


def parse_csv(source: bytes, config: PreprocessConfig) -> ParsedTable:
    """Parse CSV bytes into a cell grid.

    The first row is the header. Short rows are padded with missing cells;
    a row wider than the header raises :class:`RowOverflow`. Cells that are
    empty after stripping whitespace are missing (``None``).
    """
    if not source or not source.strip():
        raise EmptySource("source is empty")
    try:
        text = source.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise IngestError(f"source is not valid UTF-8: {exc}") from exc

    reader = csv.reader(io.StringIO(text, newline=""), delimiter=config.delimiter)
    try:
        raw_header = next(reader)
    except StopIteration:
        raise HeaderMissing("no header row") from None

    header = tuple(cell.strip() for cell in raw_header)
    if not header or all(not h for h in header):
        raise HeaderMissing("header row has no column names")
    if any(not h for h in header):
        raise HeaderMissing("header row contains empty column names")
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if list(header).count(h) > 1})
        raise DuplicateColumn(f"duplicate column names: {dupes}")

    width = len(header)
    rows: list[tuple[str | None, ...]] = []
    for lineno, raw in enumerate(reader, start=2):
        if not raw:  # blank line
            continue
        if len(raw) > width:
            raise RowOverflow(lineno, len(raw), width)
        cells = [c.strip() or None for c in raw]
        cells.extend([None] * (width - len(raw)))
        rows.append(tuple(cells))
    return ParsedTable(header=header, rows=tuple(rows))


def parse_number(cell: str | None) -> float | None:
    """Parse one cell as a finite decimal number, or None.

    Rejects NaN/Inf tokens and Python-only underscore separators.
    """
    if cell is None or "_" in cell:
        return None
    try:
        x = float(cell)
    except ValueError:
        return None
    return x if math.isfinite(x) else None


def classify_columns(
    table: ParsedTable, config: PreprocessConfig
) -> tuple[list[str], list[str]]:
    """Split non-time columns into numeric and categorical.

    A column is numeric iff at least ``numeric_threshold`` of its
    non-missing cells parse as finite numbers. Columns with no non-missing
    cells are categorical. Output preserves header order.
    """
    numeric: list[str] = []
    categorical: list[str] = []
    for idx, name in enumerate(table.header):
        if name == config.time_column:
            continue
        non_missing = 0
        parsed = 0
        for row in table.rows:
            cell = row[idx]
            if cell is None:
                continue
            non_missing += 1
            if parse_number(cell) is not None:
                parsed += 1
        if non_missing > 0 and parsed >= config.numeric_threshold * non_missing:
            numeric.append(name)
        else:
            categorical.append(name)
    return numeric, categorical


def _parse_iso_timestamp(cell: str) -> int | None:
    """ISO-8601 cell to epoch milliseconds, or None."""
    text = cell.replace("Z", "+00:00") if cell.endswith("Z") else cell
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    epoch = datetime(1970, 1, 1, tzinfo=timezone.utc)
    delta = dt - epoch
    return delta.days * 86_400_000 + delta.seconds * 1000 + delta.microseconds // 1000


def parse_timestamps(
    cells: list[str | None], column: str
) -> tuple[list[int | None], int]:
    """Convert time-column cells to int64 ticks.

    Returns (ticks aligned with the input, count of dropped cells). The
    whole column is parsed under one route: numeric if most non-missing
    cells parse as numbers, else ISO-8601. Raises
    :class:`NoUsableTimestamps` when neither route parses anything.
    """
    non_missing = [(i, c) for i, c in enumerate(cells) if c is not None]
    if not non_missing:
        raise NoUsableTimestamps(column, "column is entirely missing")

    numeric = [(i, parse_number(c)) for i, c in non_missing]
    numeric_hits = sum(1 for _, x in numeric if x is not None)
    iso = [(i, _parse_iso_timestamp(c)) for i, c in non_missing]
    iso_hits = sum(1 for _, x in iso if x is not None)

    if numeric_hits == 0 and iso_hits == 0:
        raise NoUsableTimestamps(column, "no cell parses as number or ISO-8601")

    out: list[int | None] = [None] * len(cells)
    if numeric_hits >= iso_hits:
        values = [(i, x) for i, x in numeric if x is not None]
        integral = all(float(x).is_integer() for _, x in values)
        for i, x in values:
            out[i] = int(x) if integral else int(round(x * FRACTIONAL_TICK_SCALE))
    else:
        for i, x in iso:
            if x is not None:
                out[i] = x
    dropped = len(cells) - sum(1 for x in out if x is not None)
    return out, dropped


def build_series(
    table: ParsedTable,
    config: PreprocessConfig,
    dataset_id: str,
    source_name: str = "<memory>",
) -> tuple[Dataset, IngestReport]:
    """Assemble the Dataset from a parsed table.

    Per numeric column: pair timestamps with parsed values, drop points
    whose cell is missing or unparseable, stable-sort by timestamp,
    collapse duplicate timestamps keeping the first occurrence, exclude
    series with fewer than 2 surviving points, and z-normalize values when
    configured (population std; constant series map to zeros).
    """
    numeric, categorical = classify_columns(table, config)
    report = IngestReport(
        rows_read=len(table.rows),
        columns_numeric=numeric,
        columns_categorical=categorical,
    )
    if not numeric:
        raise NoNumericColumns("no numeric columns detected")

    warnings: list[str] = []

    if config.time_column is not None:
        if config.time_column not in table.header:
            raise NoUsableTimestamps(config.time_column, "column not found")
        ticks, dropped = parse_timestamps(
            table.column(config.time_column), config.time_column
        )
        if dropped:
            report.missing_cells_dropped[config.time_column] = dropped
            warnings.append(
                f"dropped {dropped} rows with unusable cells in time column "
                f"{config.time_column!r}"
            )
    else:
        ticks = list(range(len(table.rows)))

    # one shared row order: stable sort by tick, unusable-time rows removed
    valid = [(tick, i) for i, tick in enumerate(ticks) if tick is not None]
    order = sorted(valid, key=lambda p: p[0])
    report.nonmonotone_rows_sorted = [i for _, i in order] != [i for _, i in valid]

    collapsed_total = 0
    series: list[TimeSeries] = []
    for name in numeric:
        col = table.column(name)
        ts: list[int] = []
        vs: list[float] = []
        dropped_cells = 0
        last_t: int | None = None
        for tick, row_idx in order:
            value = parse_number(col[row_idx])
            if value is None:
                dropped_cells += 1
                continue
            if last_t is not None and tick == last_t:
                collapsed_total += 1
                continue
            ts.append(tick)
            vs.append(value)
            last_t = tick
        if dropped_cells:
            report.missing_cells_dropped[name] = dropped_cells
        if len(ts) < 2:
            warnings.append(
                f"column {name!r} excluded: {len(ts)} usable point(s), need >= 2"
            )
            continue
        raw = np.array(vs, dtype=np.float64)
        stats = SeriesStats.from_values(raw)
        if config.normalize:
            # compensated centering: the residual-mean correction keeps the
            # normalized mean near zero even for tiny spreads on huge offsets
            centered = raw - raw.mean()
            centered -= centered.mean()
            std = centered.std()
            values = np.zeros_like(raw) if std == 0.0 else centered / std
        else:
            values = raw
        series.append(
            TimeSeries(
                id=series_id(dataset_id, name),
                name=name,
                t=np.array(ts, dtype=np.int64),
                v=values,
                stats=stats,
            )
        )
    report.duplicate_timestamps_collapsed = collapsed_total

    if not series:
        raise NoNumericColumns("no numeric column survived preprocessing")

    cat_cols = []
    for name in categorical:
        distinct = {c for c in table.column(name) if c is not None}
        cat_cols.append(CategoricalColumn(name=name, distinct_count=len(distinct)))

    dataset = Dataset(
        id=dataset_id,
        series=tuple(series),
        categorical_columns=tuple(cat_cols),
        provenance=Provenance(
            source=source_name,
            rows=len(table.rows),
            warnings=tuple(warnings),
            normalized=config.normalize,
        ),
    )
    return dataset, report


def ingest_csv(
    source: bytes,
    config: PreprocessConfig | None = None,
    source_name: str = "<memory>",
) -> tuple[Dataset, IngestReport]:
    """Full pipeline: bytes -> (Dataset, IngestReport)."""
    config = config or PreprocessConfig()
    table = parse_csv(source, config)
    ds_id = dataset_fingerprint(source, config.to_dict())
    return build_series(table, config, ds_id, source_name)


def export_csv(dataset: Dataset, time_column: str = "t") -> bytes:
    """Serialize a dataset back to CSV (timestamp union, one column per series).

    Values use shortest round-trip float formatting, so re-ingesting the
    output with ``normalize=False`` reproduces every series point exactly.
    """
    names = dataset.names()
    if time_column in names:
        raise IngestError(f"time column name {time_column!r} collides with a series")
    by_series = [dict(zip(s.t.tolist(), s.v.tolist())) for s in dataset.series]
    all_ticks = sorted({t for points in by_series for t in points})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([time_column] + names)
    for tick in all_ticks:
        row: list[str] = [str(tick)]
        for points in by_series:
            v = points.get(tick)
            row.append("" if v is None else repr(v))
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")
