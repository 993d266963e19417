import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsrep.errors import TsrepError
from tsrep.m4 import M4Sample, display_downsample, m4_sample
from tsrep.model import SeriesStats, TimeSeries

from conftest import make_series, random_series
from oracles import single_segment_m4


def points_of(sample: M4Sample) -> list[tuple[int, float]]:
    return list(zip(sample.t.tolist(), sample.v.tolist()))


class TestSingleSegment:
    def test_four_extremes_match_exhaustive_scan(self):
        pts = [(0, 1.0), (1, 5.0), (2, 2.0), (3, -1.0), (4, 3.0), (5, 0.0)]
        series = make_series(t=[p[0] for p in pts], v=[p[1] for p in pts])
        sample = m4_sample(series, segments=1)
        assert points_of(sample) == single_segment_m4(pts)
        assert points_of(sample) == [(0, 1.0), (1, 5.0), (3, -1.0), (5, 0.0)]

    def test_constant_series_collapses_to_endpoints(self):
        series = make_series(t=[0, 1, 2], v=[2.0, 2.0, 2.0])
        sample = m4_sample(series, segments=1)
        # max-v and min-v both resolve to the first point on ties
        assert points_of(sample) == [(0, 2.0), (2, 2.0)]

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_up_to_four_extreme_points_echo_the_series(self, n):
        # every point is one of the four designated extremes here; interior
        # points that are not extremes are dropped even when n <= 4
        values = [1.0, 5.0, -3.0, 2.0][:n]
        series = make_series(t=list(range(n)), v=values)
        sample = m4_sample(series, segments=1)
        assert points_of(sample) == list(zip(series.t.tolist(), series.v.tolist()))

    def test_non_extreme_interior_point_dropped(self):
        series = make_series(t=[0, 1, 2], v=[1.0, 2.0, 3.0])
        assert points_of(m4_sample(series, segments=1)) == [(0, 1.0), (2, 3.0)]


class TestDisplayDownsample:
    def test_width_at_least_length_echoes_regular_series(self, rng):
        # regularly spaced: one point per pixel column, nothing dropped
        series = make_series(t=np.arange(37) * 10, v=rng.normal(size=37))
        sample = display_downsample(series, width_px=37)
        assert np.array_equal(sample.t, series.t)
        assert np.array_equal(sample.v, series.v)

    def test_bound_on_large_series(self, rng):
        series = random_series(rng, 10_000)
        sample = display_downsample(series, width_px=250)
        assert len(sample) <= 1000

    def test_sine_fixture_keeps_global_extremes(self):
        t = np.arange(10_000, dtype=np.int64)
        v = np.sin(t / 100.0) * (1 + t / 5000.0)
        series = make_series(t=t, v=v)
        sample = display_downsample(series, width_px=50)
        # full-scan oracle for the global extremes
        assert v.max() in sample.v
        assert v.min() in sample.v

    def test_bad_width(self, rng):
        with pytest.raises(TsrepError):
            display_downsample(random_series(rng, 5), width_px=0)


@st.composite
def series_and_segments(draw):
    n = draw(st.integers(1, 400))
    steps = draw(st.lists(st.integers(1, 50), min_size=n, max_size=n))
    t = np.cumsum(np.array(steps, dtype=np.int64)) + draw(st.integers(-1000, 1000))
    v = np.array(draw(st.lists(
        st.floats(min_value=-1e6, max_value=1e6), min_size=n, max_size=n)))
    series = make_series(t=t, v=v)
    return series, draw(st.integers(1, 40))


class TestInvariants:
    @settings(max_examples=120, deadline=None)
    @given(series_and_segments())
    def test_m4_invariants(self, case):
        series, segments = case
        sample = m4_sample(series, segments)
        # endpoints
        assert sample.t[0] == series.t[0] and sample.v[0] == series.v[0]
        assert sample.t[-1] == series.t[-1] and sample.v[-1] == series.v[-1]
        # global extremes
        assert sample.v.max() == series.v.max()
        assert sample.v.min() == series.v.min()
        # size bound
        assert len(sample) <= min(len(series), 4 * segments)
        # strictly increasing t, points drawn from the original series
        if len(sample) > 1:
            assert (np.diff(sample.t) > 0).all()
        original = dict(zip(series.t.tolist(), series.v.tolist()))
        for t_, v_ in points_of(sample):
            assert original[t_] == v_

    @settings(max_examples=60, deadline=None)
    @given(series_and_segments())
    def test_idempotent_at_saturation(self, case):
        series, segments = case
        once = m4_sample(series, segments)
        as_series = TimeSeries(
            id=series.id, name=series.name, t=once.t, v=once.v,
            stats=SeriesStats.from_values(once.v),
        )
        twice = m4_sample(as_series, segments)
        # endpoints are preserved, so segment boundaries are identical
        assert np.array_equal(once.t, twice.t)
        assert np.array_equal(once.v, twice.v)


class TestJson:
    def test_roundtrip(self, rng):
        sample = m4_sample(random_series(rng, 100), 7)
        back = M4Sample.from_dict(sample.to_dict())
        assert back == sample
