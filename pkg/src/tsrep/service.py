"""HTTP API tying ingestion, matrix building, selection and downsampling.

Design notes:

- Dataset ids are content-addressed, so re-uploading identical bytes+config
  is idempotent and maps to the same cache entries.
- The distance matrix for the default parameters is built asynchronously
  right after upload (job endpoint for polling). A /select that needs a
  matrix someone is already building gets 409 + the job id; a /select that
  needs a missing matrix builds it synchronously, caches it, then selects.
- Selection responses are canonically serialized, so identical requests
  produce byte-identical responses.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, Form, Request, Response, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .cache import MatrixCache
from .errors import IngestError, KOutOfRange, TsrepError
from .ingest import IngestReport, PreprocessConfig, ingest_csv
from .m4 import display_downsample
from .matrix import DistanceMatrix, build_matrix, params_fingerprint
from .model import Dataset, SelectionParams, canonical_json
from .selection import greedy_select, reselect
from .stats import box_summary

DEFAULT_MAX_UPLOAD = 512 * 1024 * 1024
DEFAULT_SELECTION = {"k": 5, "alpha": 0.5}

PHASE_INGESTING = "ingesting"
PHASE_SAMPLING = "sampling"
PHASE_BUILDING = "building_matrix"
PHASE_DONE = "done"
PHASE_FAILED = "failed"


@dataclass
class Job:
    """Tracked background work; progress is monotone non-decreasing."""

    job_id: str
    phase: str = PHASE_INGESTING
    progress: float = 0.0
    error: str | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def update(self, phase: str | None = None, progress: float | None = None,
               error: str | None = None) -> None:
        with self._lock:
            if phase is not None:
                self.phase = phase
            if progress is not None and progress > self.progress:
                self.progress = progress
            if error is not None:
                self.error = error

    def to_dict(self) -> dict[str, Any]:
        with self._lock:
            return {
                "job_id": self.job_id,
                "phase": self.phase,
                "progress": self.progress,
                "error": self.error,
            }


class Store:
    """In-process state: datasets, matrices, jobs, in-flight builds."""

    def __init__(self, data_dir: Path | None, cache_dir: Path | None,
                 workers: int | None = None):
        self.data_dir = data_dir
        self.cache = MatrixCache(cache_dir) if cache_dir else None
        self.workers = workers
        self.datasets: dict[str, tuple[Dataset, IngestReport]] = {}
        self.matrices: dict[tuple[str, str], DistanceMatrix] = {}
        self.jobs: dict[str, Job] = {}
        self.building: dict[tuple[str, str], str] = {}
        self.lock = threading.RLock()
        if data_dir:
            data_dir.mkdir(parents=True, exist_ok=True)

    # --- datasets -----------------------------------------------------

    def put_dataset(self, dataset: Dataset, report: IngestReport) -> None:
        with self.lock:
            self.datasets[dataset.id] = (dataset, report)
        if self.data_dir:
            path = self.data_dir / f"{dataset.id}.json"
            if not path.exists():
                tmp = path.with_suffix(".tmp")
                tmp.write_text(json.dumps(
                    {"dataset": dataset.to_dict(), "report": report.to_dict()}))
                tmp.replace(path)

    def get_dataset(self, dataset_id: str) -> tuple[Dataset, IngestReport] | None:
        with self.lock:
            hit = self.datasets.get(dataset_id)
        if hit is not None:
            return hit
        if self.data_dir:
            path = self.data_dir / f"{dataset_id}.json"
            if path.exists():
                raw = json.loads(path.read_text())
                pair = (Dataset.from_dict(raw["dataset"]),
                        IngestReport.from_dict(raw["report"]))
                with self.lock:
                    self.datasets.setdefault(dataset_id, pair)
                return pair
        return None

    # --- matrices -----------------------------------------------------

    def get_matrix(self, dataset_id: str, fingerprint: str) -> DistanceMatrix | None:
        with self.lock:
            mat = self.matrices.get((dataset_id, fingerprint))
        if mat is not None:
            return mat
        if self.cache:
            mat = self.cache.get(dataset_id, fingerprint)
            if mat is not None:
                with self.lock:
                    self.matrices.setdefault((dataset_id, fingerprint), mat)
        return mat

    def put_matrix(self, matrix: DistanceMatrix) -> None:
        with self.lock:
            self.matrices[(matrix.dataset_id, matrix.params_fingerprint)] = matrix
        if self.cache:
            self.cache.put(matrix)

    # --- jobs ---------------------------------------------------------

    def new_job(self) -> Job:
        job = Job(job_id=uuid.uuid4().hex)
        with self.lock:
            self.jobs[job.job_id] = job
        return job

    def run_build(self, dataset: Dataset, params: SelectionParams, job: Job) -> DistanceMatrix:
        """Build + cache a matrix, updating the job. Caller owns dedup."""
        fingerprint = params_fingerprint(
            params.segments, params.dtw_window, dataset.provenance.normalized)
        key = (dataset.id, fingerprint)
        try:
            job.update(phase=PHASE_SAMPLING, progress=0.0)
            matrix = build_matrix(
                dataset, params, workers=self.workers,
                progress=lambda f: job.update(phase=PHASE_BUILDING, progress=0.02 + 0.98 * f),
            )
            self.put_matrix(matrix)
            job.update(phase=PHASE_DONE, progress=1.0)
            return matrix
        except Exception as exc:
            job.update(phase=PHASE_FAILED, error=str(exc))
            raise
        finally:
            with self.lock:
                if self.building.get(key) == job.job_id:
                    del self.building[key]

    def start_build(self, dataset: Dataset, params: SelectionParams) -> str:
        """Start (or join) an async matrix build; returns the job id."""
        fingerprint = params_fingerprint(
            params.segments, params.dtw_window, dataset.provenance.normalized)
        key = (dataset.id, fingerprint)
        with self.lock:
            existing = self.building.get(key)
            if existing is not None:
                return existing
        if self.get_matrix(dataset.id, fingerprint) is not None:
            job = self.new_job()
            job.update(phase=PHASE_DONE, progress=1.0)
            return job.job_id
        job = self.new_job()
        with self.lock:
            racer = self.building.get(key)
            if racer is not None:
                return racer
            self.building[key] = job.job_id
        thread = threading.Thread(
            target=self._build_quiet, args=(dataset, params, job), daemon=True)
        thread.start()
        return job.job_id

    def _build_quiet(self, dataset: Dataset, params: SelectionParams, job: Job) -> None:
        try:
            self.run_build(dataset, params, job)
        except Exception:
            pass  # recorded on the job


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": code, "message": message})


def create_app(
    data_dir: str | Path | None = None,
    cache_dir: str | Path | None = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD,
    workers: int | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="tsrep", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    store = Store(
        Path(data_dir) if data_dir else None,
        Path(cache_dir) if cache_dir else None,
        workers=workers,
    )
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def bad_request(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", str(exc.errors()))

    @app.exception_handler(TsrepError)
    async def domain_error(request: Request, exc: TsrepError):
        return _error(400, type(exc).__name__, str(exc))

    # --- ingestion ----------------------------------------------------

    @app.post("/datasets")
    async def upload_dataset(file: UploadFile, config: str | None = Form(None)):
        raw = await file.read()
        if len(raw) > max_upload_bytes:
            return _error(413, "too_large",
                          f"upload exceeds {max_upload_bytes} bytes")
        try:
            cfg_dict = json.loads(config) if config else {}
            cfg = PreprocessConfig.from_dict(cfg_dict)
        except (json.JSONDecodeError, TypeError) as exc:
            return _error(400, "bad_config", f"config is not valid JSON: {exc}")
        except IngestError as exc:
            return _error(400, type(exc).__name__, str(exc))
        try:
            dataset, report = ingest_csv(raw, cfg, source_name=file.filename or "<upload>")
        except IngestError as exc:
            return _error(400, type(exc).__name__, str(exc))
        store.put_dataset(dataset, report)
        job_id = store.start_build(dataset, SelectionParams(**DEFAULT_SELECTION))
        return {"dataset_id": dataset.id, "job_id": job_id,
                "report": report.to_dict()}

    @app.get("/datasets")
    def list_datasets():
        with store.lock:
            items = [
                {"dataset_id": ds.id, "n": ds.n, "names": ds.names(),
                 "source": ds.provenance.source}
                for ds, _ in store.datasets.values()
            ]
        return {"datasets": items}

    @app.get("/datasets/{dataset_id}")
    def dataset_meta(dataset_id: str):
        hit = store.get_dataset(dataset_id)
        if hit is None:
            return _error(404, "unknown_dataset", dataset_id)
        ds, report = hit
        return {
            "dataset_id": ds.id,
            "n": ds.n,
            "names": ds.names(),
            "categorical_columns": [c.to_dict() for c in ds.categorical_columns],
            "provenance": ds.provenance.to_dict(),
            "report": report.to_dict(),
        }

    # --- display feeds --------------------------------------------------

    @app.get("/datasets/{dataset_id}/series")
    def series_samples(dataset_id: str, width: int, names: str | None = None):
        hit = store.get_dataset(dataset_id)
        if hit is None:
            return _error(404, "unknown_dataset", dataset_id)
        ds, _ = hit
        if width < 1:
            return _error(400, "bad_width", f"width must be >= 1, got {width}")
        wanted = names.split(",") if names else ds.names()
        out = []
        for name in wanted:
            series = ds.get(name)
            if series is None:
                return _error(404, "unknown_series", name)
            out.append(display_downsample(series, width).to_dict())
        return {"series": out}

    @app.get("/datasets/{dataset_id}/summary")
    def dataset_summary(dataset_id: str):
        hit = store.get_dataset(dataset_id)
        if hit is None:
            return _error(404, "unknown_dataset", dataset_id)
        ds, _ = hit
        return {
            "series": [
                {"id": s.id, "name": s.name, "stats": s.stats.to_dict(),
                 "box": box_summary(s.v).to_dict()}
                for s in ds.series
            ]
        }

    # --- selection ------------------------------------------------------

    @app.post("/datasets/{dataset_id}/select")
    def select(dataset_id: str, body: dict = Body(...)):
        # sync endpoint: FastAPI serves it from a threadpool, so a
        # synchronous matrix build here does not stall other requests
        hit = store.get_dataset(dataset_id)
        if hit is None:
            return _error(404, "unknown_dataset", dataset_id)
        ds, _ = hit
        try:
            params = SelectionParams.from_dict({**DEFAULT_SELECTION, **body})
        except (KeyError, ValueError, TypeError) as exc:
            return _error(400, "bad_params", str(exc))
        except KOutOfRange as exc:
            return _error(400, "KOutOfRange", str(exc))
        if not (1 <= params.k <= ds.n):
            return _error(400, "KOutOfRange", f"k={params.k} out of range [1, {ds.n}]")

        fingerprint = params_fingerprint(
            params.segments, params.dtw_window, ds.provenance.normalized)
        matrix = store.get_matrix(dataset_id, fingerprint)
        if matrix is not None:
            result = reselect(matrix, params)
            served_from_cache = True
        else:
            key = (dataset_id, fingerprint)
            with store.lock:
                in_flight = store.building.get(key)
                if in_flight is None:
                    job = store.new_job()
                    store.building[key] = job.job_id
                else:
                    job = None
            if job is None:
                return JSONResponse(
                    status_code=409,
                    content={"error": "matrix_building",
                             "message": "matrix build in progress; poll the job",
                             "job_id": in_flight})
            matrix = store.run_build(ds, params, job)
            result = greedy_select(matrix, params)
            served_from_cache = False

        payload = {
            "dataset_id": dataset_id,
            "served_from_cache": served_from_cache,
            "result": result.to_dict(),
        }
        return Response(content=canonical_json(payload),
                        media_type="application/json")

    @app.get("/datasets/{dataset_id}/matrix")
    def get_matrix(dataset_id: str, segments: int | None = None,
                   dtw_window: int | None = None):
        hit = store.get_dataset(dataset_id)
        if hit is None:
            return _error(404, "unknown_dataset", dataset_id)
        ds, _ = hit
        seg = segments if segments is not None else SelectionParams(**DEFAULT_SELECTION).segments
        fingerprint = params_fingerprint(seg, dtw_window, ds.provenance.normalized)
        matrix = store.get_matrix(dataset_id, fingerprint)
        if matrix is None:
            return _error(404, "matrix_missing",
                          f"no matrix for fingerprint {fingerprint}")
        return matrix.to_dict()

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        with store.lock:
            job = store.jobs.get(job_id)
        if job is None:
            return _error(404, "unknown_job", job_id)
        return job.to_dict()

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
