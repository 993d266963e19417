"""Command-line front-end: ingest, select, dtw, m4, serve.

Exit codes: 0 success, 1 computation error, 2 usage/IO error.
stdout carries data; diagnostics go to stderr.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .cache import MatrixCache
from .errors import TsrepError
from .ingest import PreprocessConfig, ingest_csv, parse_csv, parse_number
from .m4 import m4_sample
from .matrix import build_matrix, params_fingerprint
from .model import Dataset, SelectionParams, canonical_json
from .selection import greedy_select


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return click.exceptions.Exit(1)


@click.group()
@click.version_option()
def main():
    """Representative time-series selection toolkit."""


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-o", "--output", "output", required=True,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Where to write the dataset JSON.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Ingest report path (default: <output>.report.json).")
@click.option("--time-col", default=None, help="Timestamp column (default: row index).")
@click.option("--no-normalize", is_flag=True, help="Keep raw values (skip z-normalization).")
@click.option("--delimiter", default=",", show_default=True)
@click.option("--numeric-threshold", default=0.95, show_default=True,
              help="Fraction of parseable cells required for a numeric column.")
def ingest(csv_path: Path, output: Path, report_path: Path | None, time_col: str | None,
           no_normalize: bool, delimiter: str, numeric_threshold: float):
    """Parse a CSV into a dataset JSON plus an ingest report."""
    try:
        config = PreprocessConfig(
            time_column=time_col,
            normalize=not no_normalize,
            delimiter=delimiter,
            numeric_threshold=numeric_threshold,
        )
        dataset, report = ingest_csv(csv_path.read_bytes(), config,
                                     source_name=csv_path.name)
    except TsrepError as exc:
        raise _fail(str(exc))
    output.write_text(json.dumps(dataset.to_dict()))
    report_file = report_path or output.with_suffix(output.suffix + ".report.json")
    report_file.write_text(json.dumps(report.to_dict()))
    click.echo(f"wrote {output} ({dataset.n} series) and {report_file}", err=True)


def _load_dataset(path: Path) -> Dataset:
    try:
        return Dataset.from_dict(json.loads(path.read_text()))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise _fail(f"{path} is not a dataset JSON: {exc}")


@main.command()
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--k", "k", type=int, required=True, help="Number of representatives.")
@click.option("--alpha", type=float, required=True,
              help="Diversity weight in [0, 1]; 0 favors coverage.")
@click.option("--segments", type=int, default=25, show_default=True,
              help="M4 segments for the similarity pipeline.")
@click.option("--window", type=int, default=None, help="DTW band half-width.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.option("--cache", "cache_dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, envvar="TSREP_CACHE_DIR",
              help="Distance-matrix cache directory (no caching when omitted).")
@click.option("--verbose", is_flag=True, help="Log cache and timing info to stderr.")
@click.option("--quiet", is_flag=True, help="Suppress progress output.")
def select(dataset_path: Path, k: int, alpha: float, segments: int, window: int | None,
           fmt: str, cache_dir: Path | None, verbose: bool, quiet: bool):
    """Select k representative series from an ingested dataset."""
    dataset = _load_dataset(dataset_path)
    try:
        params = SelectionParams(k=k, alpha=alpha, segments=segments, dtw_window=window)
        fingerprint = params_fingerprint(segments, window, dataset.provenance.normalized)
        cache = MatrixCache(cache_dir) if cache_dir else None
        matrix = cache.get(dataset.id, fingerprint) if cache else None
        t0 = time.perf_counter()
        if matrix is None:
            progress = None
            if not quiet and sys.stderr.isatty():
                progress = lambda f: click.echo(f"\rbuilding matrix: {f:5.1%}", err=True, nl=False)
            matrix = build_matrix(dataset, params, progress=progress)
            if progress:
                click.echo("", err=True)
            if cache:
                cache.put(matrix)
            if verbose:
                click.echo(f"cache miss; matrix built in "
                           f"{time.perf_counter() - t0:.3f}s", err=True)
        elif verbose:
            click.echo(f"cache hit: {cache.path(dataset.id, fingerprint)}", err=True)
        result = greedy_select(matrix, params)
    except TsrepError as exc:
        raise _fail(str(exc))

    if fmt == "json":
        click.echo(canonical_json(result.to_dict()))
    else:
        click.echo("step,index,id,name,delta_div,delta_cov,score,div_after,cov_after,objective_after")
        for step, entry in enumerate(result.trace, start=1):
            name = entry.picked_id.split(":", 1)[-1]
            click.echo(",".join([
                str(step), str(entry.picked), entry.picked_id, name,
                repr(entry.delta_div), repr(entry.delta_cov), repr(entry.score),
                repr(entry.div_after), repr(entry.cov_after), repr(entry.objective_after),
            ]))


def _read_values(path: Path, column: str | None) -> list[float]:
    """First (or named) numeric column of a CSV, in file order."""
    table = parse_csv(path.read_bytes(), PreprocessConfig())
    candidates = [column] if column else list(table.header)
    for name in candidates:
        if name not in table.header:
            raise _fail(f"{path}: no column named {name!r}")
        cells = table.column(name)
        values = [parse_number(c) for c in cells]
        kept = [v for v in values if v is not None]
        if kept and len(kept) == sum(1 for c in cells if c is not None):
            return kept
        if column:
            raise _fail(f"{path}: column {name!r} is not fully numeric")
    raise _fail(f"{path}: no numeric column found")


@main.command()
@click.argument("csv_a", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("csv_b", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--window", type=int, default=None, help="DTW band half-width.")
@click.option("--column", default=None, help="Value column (default: first numeric).")
def dtw(csv_a: Path, csv_b: Path, window: int | None, column: str | None):
    """Print the DTW distance between two single-series CSV files."""
    from . import dtw as dtw_mod

    a = _read_values(csv_a, column)
    b = _read_values(csv_b, column)
    try:
        click.echo(repr(dtw_mod.dtw_distance(a, b, window)))
    except TsrepError as exc:
        raise _fail(str(exc))


@main.command()
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--series", "series_name", required=True, help="Series (column) name.")
@click.option("--segments", type=int, required=True)
def m4(dataset_path: Path, series_name: str, segments: int):
    """Print the M4 sample of one series as JSON."""
    dataset = _load_dataset(dataset_path)
    series = dataset.get(series_name)
    if series is None:
        raise _fail(f"no series named {series_name!r}; have {dataset.names()}")
    try:
        sample = m4_sample(series, segments)
    except TsrepError as exc:
        raise _fail(str(exc))
    click.echo(canonical_json(sample.to_dict()))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True, envvar="TSREP_HOST")
@click.option("--port", default=8237, show_default=True, envvar="TSREP_PORT")
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path),
              default=".tsrep/data", show_default=True, envvar="TSREP_DATA_DIR")
@click.option("--cache-dir", type=click.Path(file_okay=False, path_type=Path),
              default=".tsrep/cache", show_default=True, envvar="TSREP_CACHE_DIR")
@click.option("--max-upload-mb", default=512, show_default=True, envvar="TSREP_MAX_UPLOAD_MB")
@click.option("--ui-dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, envvar="TSREP_UI_DIR",
              help="Static directory with the built web UI.")
def serve(host: str, port: int, data_dir: Path, cache_dir: Path, max_upload_mb: int,
          ui_dir: Path | None):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(
        data_dir=data_dir,
        cache_dir=cache_dir,
        max_upload_bytes=max_upload_mb * 1024 * 1024,
        ui_dir=ui_dir,
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
