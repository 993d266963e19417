"""Exception hierarchy shared across the pipeline.

Every error raised by tsrep derives from :class:`TsrepError` so callers
(CLI, HTTP service) can map the whole family to exit codes / status codes
in one place.
"""

from __future__ import annotations


class TsrepError(Exception):
    """Base class for all tsrep errors."""


# --- ingestion ---------------------------------------------------------


class IngestError(TsrepError):
    """Base class for CSV ingestion failures."""


class EmptySource(IngestError):
    """The input byte stream contains no data."""


class HeaderMissing(IngestError):
    """The CSV has no usable header row."""


class RowOverflow(IngestError):
    """A data row has more cells than the header."""

    def __init__(self, line: int, width: int, header_width: int):
        super().__init__(
            f"row at line {line} has {width} cells, header has {header_width}"
        )
        self.line = line


class DuplicateColumn(IngestError):
    """Two columns share the same name."""


class NoNumericColumns(IngestError):
    """No numeric column survived classification/preprocessing."""


class NoUsableTimestamps(IngestError):
    """The configured time column cannot be parsed."""

    def __init__(self, column: str, detail: str = ""):
        msg = f"time column {column!r} has no usable timestamps"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.column = column


# --- sampling / distances ----------------------------------------------


class EmptySeries(TsrepError):
    """A series with zero points was passed where at least one is needed."""


class EmptySequence(TsrepError):
    """DTW input sequence is empty."""


class BandTooNarrow(TsrepError):
    """Sakoe-Chiba band is narrower than the length difference."""

    def __init__(self, window: int, len_a: int, len_b: int):
        super().__init__(
            f"window {window} < |{len_a} - {len_b}|; no warping path exists"
        )


class MatrixBuildError(TsrepError):
    """Sampling or DTW failed while building the distance matrix."""


class CorruptCacheEntry(TsrepError):
    """A cache file failed its integrity check (evicted by the reader)."""


# --- selection ----------------------------------------------------------


class EmptyMatrix(TsrepError):
    """Selection requires a non-empty distance matrix."""


class KOutOfRange(TsrepError):
    """Requested representative count is outside [1, n]."""

    def __init__(self, k: int, n: int):
        super().__init__(f"k={k} out of range [1, {n}]")
        self.k = k
        self.n = n


class EmptyRepresentativeSet(TsrepError):
    """Coverage/objective evaluated on an empty representative set."""


class MatrixMissing(TsrepError):
    """Reselect requested but no distance matrix is cached; build first."""
