"""tsrep: representative time-series selection.

Pipeline: CSV ingestion -> segment extreme-point (M4) sampling -> pairwise
DTW distance matrix (computed once, cached) -> greedy diversity/coverage
selection, served through a CLI and an HTTP API for interactive use.
"""

from .ingest import IngestReport, PreprocessConfig, ingest_csv
from .m4 import M4Sample, display_downsample, m4_sample
from .matrix import DistanceMatrix, build_matrix, params_fingerprint
from .model import Dataset, SelectionParams, TimePoint, TimeSeries, dataset_fingerprint
from .selection import (
    SelectionResult,
    coverage,
    diversity,
    greedy_select,
    greedy_select_oracle,
    objective,
    reselect,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DistanceMatrix",
    "IngestReport",
    "M4Sample",
    "PreprocessConfig",
    "SelectionParams",
    "SelectionResult",
    "TimePoint",
    "TimeSeries",
    "__version__",
    "build_matrix",
    "coverage",
    "dataset_fingerprint",
    "display_downsample",
    "diversity",
    "greedy_select",
    "greedy_select_oracle",
    "ingest_csv",
    "m4_sample",
    "objective",
    "params_fingerprint",
    "reselect",
]
