"""Persistent distance-matrix cache, one binary file per key.

Layout (little-endian):

    magic "TSDM" | version u32 | header_len u32 | header JSON (utf-8)
    | n u32 | n*n float64 row-major | sha256 of everything before it

The header JSON carries dataset_id, params_fingerprint and the series
order, so a cache hit reconstructs the matrix bit-exactly. Any integrity
failure (bad magic, version, checksum, or key mismatch) is treated as a
miss and the entry is evicted.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .matrix import DistanceMatrix

_MAGIC = b"TSDM"
_VERSION = 1
_DIGEST_SIZE = 32


def _encode(matrix: DistanceMatrix) -> bytes:
    header = json.dumps(
        {
            "dataset_id": matrix.dataset_id,
            "params_fingerprint": matrix.params_fingerprint,
            "order": list(matrix.order),
        },
        sort_keys=True,
    ).encode("utf-8")
    body = np.ascontiguousarray(matrix.d, dtype="<f8").tobytes()
    payload = (
        _MAGIC
        + struct.pack("<I", _VERSION)
        + struct.pack("<I", len(header))
        + header
        + struct.pack("<I", matrix.n)
        + body
    )
    return payload + hashlib.sha256(payload).digest()


def _decode(blob: bytes) -> DistanceMatrix:
    if len(blob) < len(_MAGIC) + 8 + _DIGEST_SIZE:
        raise ValueError("truncated cache entry")
    payload, digest = blob[:-_DIGEST_SIZE], blob[-_DIGEST_SIZE:]
    if hashlib.sha256(payload).digest() != digest:
        raise ValueError("checksum mismatch")
    if payload[:4] != _MAGIC:
        raise ValueError("bad magic")
    (version,) = struct.unpack_from("<I", payload, 4)
    if version != _VERSION:
        raise ValueError(f"unsupported version {version}")
    (header_len,) = struct.unpack_from("<I", payload, 8)
    header_end = 12 + header_len
    header = json.loads(payload[12:header_end].decode("utf-8"))
    (n,) = struct.unpack_from("<I", payload, header_end)
    body = payload[header_end + 4 :]
    if len(body) != n * n * 8:
        raise ValueError("matrix body has wrong size")
    d = np.frombuffer(body, dtype="<f8").reshape(n, n).astype(np.float64)
    return DistanceMatrix(
        dataset_id=header["dataset_id"],
        params_fingerprint=header["params_fingerprint"],
        order=tuple(header["order"]),
        d=d,
    )


class MatrixCache:
    """Directory-backed cache keyed by (dataset_id, params_fingerprint)."""

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path(self, dataset_id: str, params_fingerprint: str) -> Path:
        return self.directory / f"{dataset_id}-{params_fingerprint}.dtwm"

    def put(self, matrix: DistanceMatrix) -> Path:
        """Atomically persist a matrix; returns the entry path."""
        target = self.path(matrix.dataset_id, matrix.params_fingerprint)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(_encode(matrix))
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return target

    def get(self, dataset_id: str, params_fingerprint: str) -> DistanceMatrix | None:
        """Return the cached matrix, or None. Corrupt entries are evicted."""
        target = self.path(dataset_id, params_fingerprint)
        try:
            blob = target.read_bytes()
        except FileNotFoundError:
            return None
        try:
            matrix = _decode(blob)
            if (
                matrix.dataset_id != dataset_id
                or matrix.params_fingerprint != params_fingerprint
            ):
                raise ValueError("cache entry key mismatch")
        except (ValueError, KeyError, json.JSONDecodeError):
            target.unlink(missing_ok=True)
            return None
        return matrix

    def evict(self, dataset_id: str, params_fingerprint: str) -> None:
        self.path(dataset_id, params_fingerprint).unlink(missing_ok=True)
