import numpy as np
import pytest

from tsrep import dtw
from tsrep.errors import MatrixBuildError
from tsrep.ingest import PreprocessConfig, ingest_csv
from tsrep.m4 import m4_sample
from tsrep.matrix import DistanceMatrix, build_matrix, params_fingerprint
from tsrep.model import SelectionParams

from conftest import csv_bytes, float_cells


def dataset_of(rng, n_series, length, normalize=True):
    cols = {f"s{i}": float_cells(rng.normal(size=length)) for i in range(n_series)}
    ds, _ = ingest_csv(csv_bytes(cols), PreprocessConfig(normalize=normalize))
    return ds


class TestFingerprint:
    def test_distinguishes_every_component(self):
        base = params_fingerprint(25, None, True)
        assert params_fingerprint(26, None, True) != base
        assert params_fingerprint(25, 3, True) != base
        assert params_fingerprint(25, None, False) != base
        assert params_fingerprint(25, None, True) == base


class TestBuildMatrix:
    def test_single_series_dataset(self, rng):
        ds = dataset_of(rng, 1, 30)
        m = build_matrix(ds, SelectionParams(k=1, alpha=0.5))
        assert m.d.shape == (1, 1) and m.d[0, 0] == 0.0

    def test_duplicated_column_has_zero_distance(self, rng):
        vals = float_cells(rng.normal(size=50))
        ds, _ = ingest_csv(csv_bytes({"a": vals, "a_copy": vals, "b": float_cells(rng.normal(size=50))}))
        m = build_matrix(ds, SelectionParams(k=1, alpha=0.5, segments=8))
        assert m.d[0, 1] == 0.0
        assert m.d[0, 2] > 0.0

    def test_entries_match_pairwise_recompute(self, rng):
        # from-scratch per-pair oracle over a 10-series fixture
        ds = dataset_of(rng, 10, 120)
        params = SelectionParams(k=3, alpha=0.5, segments=6)
        m = build_matrix(ds, params)
        samples = [m4_sample(s, 6).v for s in ds.series]
        for i in range(10):
            for j in range(10):
                expected = 0.0 if i == j else dtw.dtw_distance(samples[i], samples[j])
                assert m.d[i, j] == expected

    def test_symmetry_zero_diagonal_finite(self, rng):
        m = build_matrix(dataset_of(rng, 8, 60), SelectionParams(k=2, alpha=0.1))
        assert np.array_equal(m.d, m.d.T)
        assert np.all(np.diag(m.d) == 0.0)
        assert np.isfinite(m.d).all()

    def test_deterministic_across_worker_counts(self, rng):
        ds = dataset_of(rng, 9, 80)
        params = SelectionParams(k=2, alpha=0.5, segments=7)
        m1 = build_matrix(ds, params, workers=1)
        m2 = build_matrix(ds, params, workers=4)
        assert np.array_equal(m1.d, m2.d)

    def test_progress_monotone_and_complete(self, rng):
        seen = []
        build_matrix(dataset_of(rng, 7, 40), SelectionParams(k=2, alpha=0.5),
                     progress=seen.append)
        assert seen == sorted(seen)
        assert seen[-1] == 1.0

    def test_band_errors_carry_series_ids(self, rng):
        # unequal sample lengths + window 0 cannot align
        cols = {
            "long": float_cells(rng.normal(size=200)),
            "short": float_cells(rng.normal(size=200)),
        }
        cols["short"][10:150] = ["x"] * 140  # drops most points of one series
        ds, _ = ingest_csv(
            csv_bytes(cols), PreprocessConfig(numeric_threshold=0.2))
        with pytest.raises(MatrixBuildError) as exc:
            build_matrix(ds, SelectionParams(k=1, alpha=0.5, segments=50, dtw_window=0))
        assert "long" in str(exc.value) and "short" in str(exc.value)

    def test_normalize_flag_lands_in_fingerprint(self, rng):
        raw = dataset_of(rng, 3, 30, normalize=False)
        norm = dataset_of(rng, 3, 30, normalize=True)
        params = SelectionParams(k=1, alpha=0.5)
        assert build_matrix(raw, params).params_fingerprint.endswith("norm0")
        assert build_matrix(norm, params).params_fingerprint.endswith("norm1")


class TestSerialization:
    def test_json_roundtrip(self, rng):
        m = build_matrix(dataset_of(rng, 5, 40), SelectionParams(k=1, alpha=0.0))
        assert DistanceMatrix.from_dict(m.to_dict()) == m

    def test_csv_export_shape(self, rng):
        m = build_matrix(dataset_of(rng, 4, 40), SelectionParams(k=1, alpha=0.0))
        lines = m.to_csv().strip().splitlines()
        assert len(lines) == 5
        assert lines[0].startswith("series,")
        # values round-trip through repr
        first_row = lines[1].split(",")[1:]
        assert [float(x) for x in first_row] == m.d[0].tolist()

    def test_validation_rejects_asymmetry(self):
        with pytest.raises(Exception):
            DistanceMatrix(
                dataset_id="x", params_fingerprint="f", order=("a", "b"),
                d=np.array([[0.0, 1.0], [2.0, 0.0]]),
            )
