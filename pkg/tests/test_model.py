import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsrep.errors import TsrepError
from tsrep.model import (
    Dataset,
    Provenance,
    SelectionParams,
    SeriesStats,
    TimeSeries,
    dataset_fingerprint,
)

from conftest import make_series


class TestFingerprint:
    def test_same_bytes_same_config_same_id(self):
        cfg = {"segments": 25, "normalize": True}
        assert dataset_fingerprint(b"abc", cfg) == dataset_fingerprint(b"abc", cfg)

    def test_config_is_part_of_the_key(self):
        assert dataset_fingerprint(b"abc", {"segments": 25}) != dataset_fingerprint(
            b"abc", {"segments": 50}
        )

    def test_key_order_does_not_matter(self):
        a = dataset_fingerprint(b"abc", {"x": 1, "y": 2})
        b = dataset_fingerprint(b"abc", {"y": 2, "x": 1})
        assert a == b

    def test_injective_over_fixture_corpus(self):
        # >= 1000 distinct inputs: single-byte flips and length variations
        base = bytearray(b"fixture-corpus-0123456789" * 12)
        seen = set()
        cfg = {"normalize": True}
        for i in range(len(base)):
            for delta in (1, 7, 130):
                mutated = bytearray(base)
                mutated[i] = (mutated[i] + delta) % 256
                seen.add(dataset_fingerprint(bytes(mutated), cfg))
        for cut in range(1, len(base)):
            seen.add(dataset_fingerprint(bytes(base[:cut]), cfg))
        total = 3 * len(base) + (len(base) - 1)
        assert total >= 1000
        assert len(seen) == total

    def test_empty_source_rejected(self):
        with pytest.raises(TsrepError):
            dataset_fingerprint(b"", {})


def _dataset(series_list) -> Dataset:
    return Dataset(
        id="d" * 64,
        series=tuple(series_list),
        categorical_columns=(),
        provenance=Provenance(source="mem", rows=3, warnings=(), normalized=True),
    )


class TestInvariants:
    def test_timestamps_must_increase(self):
        with pytest.raises(TsrepError):
            make_series(t=[3, 1, 2], v=[1.0, 2.0, 3.0])

    def test_values_must_be_finite(self):
        with pytest.raises(TsrepError):
            make_series(t=[1, 2], v=[1.0, np.nan])

    def test_series_names_unique(self):
        s = make_series(name="a", t=[1, 2], v=[0.0, 1.0])
        with pytest.raises(TsrepError):
            _dataset([s, s])

    def test_dataset_needs_a_series(self):
        with pytest.raises(TsrepError):
            _dataset([])

    def test_arrays_are_immutable(self):
        s = make_series(t=[1, 2], v=[0.0, 1.0])
        with pytest.raises(ValueError):
            s.v[0] = 5.0

    def test_selection_params_validation(self):
        with pytest.raises(TsrepError):
            SelectionParams(k=0, alpha=0.5)
        with pytest.raises(TsrepError):
            SelectionParams(k=1, alpha=1.5)
        with pytest.raises(TsrepError):
            SelectionParams(k=1, alpha=0.5, segments=0)
        with pytest.raises(TsrepError):
            SelectionParams(k=1, alpha=0.5, dtw_window=-1)


finite_floats = st.floats(
    allow_nan=False, allow_infinity=False, min_value=-1e12, max_value=1e12
)


@st.composite
def series_strategy(draw):
    n = draw(st.integers(min_value=1, max_value=30))
    steps = draw(st.lists(st.integers(1, 10**6), min_size=n, max_size=n))
    t = np.cumsum(np.array(steps, dtype=np.int64))
    v = np.array(draw(st.lists(finite_floats, min_size=n, max_size=n)))
    return make_series(name=draw(st.text(min_size=1, max_size=8)), t=t, v=v)


class TestJsonRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(series_strategy())
    def test_series_roundtrip_bit_exact(self, series):
        encoded = json.dumps(series.to_dict())
        back = TimeSeries.from_dict(json.loads(encoded))
        assert back == series
        assert back.t.dtype == np.int64 and back.v.dtype == np.float64

    def test_dataset_roundtrip(self):
        ds = _dataset(
            [
                make_series(name="a", t=[1, 5, 9], v=[0.5, -1.25, 3.0]),
                make_series(name="b", t=[2, 3], v=[1e-300, 1e300]),
            ]
        )
        back = Dataset.from_dict(json.loads(json.dumps(ds.to_dict())))
        assert back == ds

    def test_params_roundtrip(self):
        p = SelectionParams(k=3, alpha=0.25, segments=40, dtw_window=None)
        assert SelectionParams.from_dict(json.loads(json.dumps(p.to_dict()))) == p
        p2 = SelectionParams(k=1, alpha=1.0, dtw_window=7)
        assert SelectionParams.from_dict(json.loads(json.dumps(p2.to_dict()))) == p2

    def test_stats_roundtrip(self):
        s = SeriesStats.from_values(np.array([1.0, 2.5, -3.75]))
        assert SeriesStats.from_dict(json.loads(json.dumps(s.to_dict()))) == s
