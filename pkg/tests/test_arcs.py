import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from narrative_arcs.arcs import (
    Arc,
    build_ensemble,
    downsample_lttb,
    ensemble_median,
    lttb_indices,
    round_half_away,
    smooth,
    standardize,
    window_size,
)
from narrative_arcs.errors import (
    BadFraction,
    ConstantSeries,
    LengthMismatch,
    StageError,
    ThresholdExceedsLength,
    ThresholdTooSmall,
    TooFewArcs,
)
from narrative_arcs.scorers import ModelDescriptor, SentimentSeries

from oracles import lttb_exhaustive, median_by_sort, moving_average, zscore


def series(values, model="m"):
    return SentimentSeries(ModelDescriptor(model, "lexical"), "c", values)


def std_arc(values, model="m"):
    return Arc.from_values(values, ModelDescriptor(model, "lexical"), "c", "standardized")


finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_standardize_example():
    z = standardize(series([1, 2, 3])).y
    s = math.sqrt(1.5)  # 1 / sqrt(2/3)
    assert np.allclose(z, [-s, 0, s], atol=1e-15)


def test_standardize_constant():
    with pytest.raises(ConstantSeries):
        standardize(series([5, 5, 5]))


@given(arrays(float, st.integers(2, 200), elements=finite))
def test_standardize_matches_oracle(x):
    try:
        z = standardize(series(x)).y
    except ConstantSeries:
        return
    assert abs(z.mean()) <= 1e-9
    assert abs(z.std() - 1) <= 1e-9
    np.testing.assert_allclose(z, zscore(list(x)), atol=1e-7)


@given(
    arrays(float, st.integers(2, 100), elements=st.floats(-100, 100)),
    st.floats(0.01, 100),
    st.floats(-100, 100),
)
def test_standardize_affine_invariant(x, a, b):
    if np.ptp(x) < 1e-3:
        return
    np.testing.assert_allclose(standardize(series(a * x + b)).y, standardize(series(x)).y, atol=1e-9)


def test_window_rounding():
    assert round_half_away(2.5) == 3
    assert round_half_away(-2.5) == -3
    assert window_size(0.10, 25) == 3  # 2.5 rounds up
    assert window_size(0.10, 4) == 1
    for bad in (0, -0.1, 1.5):
        with pytest.raises(BadFraction):
            window_size(bad, 10)


def test_smooth_examples():
    x = std_arc([0, 10, 0])
    assert np.allclose(smooth(x, 1.0).y, [5, 10 / 3, 5])
    y = std_arc([3.0, -1.0, 2.0, 7.0])
    assert np.array_equal(smooth(y, 0.01).y, y.y)
    c = std_arc([2.0] * 9)
    assert np.array_equal(smooth(c, 0.5).y, c.y)


def test_smooth_needs_standardized():
    with pytest.raises(StageError):
        smooth(Arc.from_values([1, 2, 3], stage="smoothed"))


@given(arrays(float, st.integers(1, 150), elements=finite), st.floats(0.001, 1.0))
def test_smooth_matches_oracle_and_stays_in_range(y, fraction):
    out = smooth(std_arc(y), fraction).y
    assert len(out) == len(y)
    w = max(1, round_half_away(fraction * len(y)))
    np.testing.assert_allclose(out, moving_average(list(y), w), rtol=1e-9, atol=1e-6)
    assert out.min() >= y.min() and out.max() <= y.max()


def test_lttb_tie_example():
    arc = Arc.from_values([0, 5, 0, 5, 0], stage="smoothed")
    out = downsample_lttb(arc, 3)
    assert out.points == [(0.0, 0.0), (1.0, 5.0), (4.0, 0.0)]
    assert out.stage == "downsampled"


def test_lttb_threshold_equals_length():
    arc = Arc.from_values(np.arange(7.0) ** 2, stage="smoothed")
    assert downsample_lttb(arc, 7).points == arc.points


def test_lttb_errors():
    arc = Arc.from_values(np.arange(10.0), stage="smoothed")
    with pytest.raises(ThresholdTooSmall):
        downsample_lttb(arc, 2)
    with pytest.raises(ThresholdExceedsLength):
        downsample_lttb(arc, 11)


@settings(max_examples=300)
@given(st.data())
def test_lttb_matches_exhaustive_oracle(data):
    n = data.draw(st.integers(3, 12))
    t = data.draw(st.integers(3, min(5, n)))
    y = data.draw(st.lists(st.floats(-50, 50), min_size=n, max_size=n))
    steps = data.draw(st.lists(st.floats(0.1, 5), min_size=n, max_size=n))
    x = np.cumsum(steps)
    assert lttb_indices(x, np.array(y), t).tolist() == lttb_exhaustive(x.tolist(), y, t)


@given(arrays(float, st.integers(3, 400), elements=finite), st.integers(3, 60))
def test_lttb_properties(y, t):
    t = min(t, len(y))
    arc = Arc.from_values(y, stage="smoothed")
    out = downsample_lttb(arc, t)
    assert len(out) == t
    assert out.points[0] == arc.points[0] and out.points[-1] == arc.points[-1]
    assert set(out.points) <= set(arc.points)
    assert np.all(np.diff(out.x) > 0)


def test_median_examples():
    m = ensemble_median([std_arc([1, 1, 1]), std_arc([3, 3, 3])])
    assert m.y.tolist() == [2, 2, 2]
    assert m.model.family == "ensemble"
    m = ensemble_median([std_arc([0]), std_arc([1]), std_arc([9])])
    assert m.y.tolist() == [1]


def test_median_sort_oracle():
    rng = np.random.default_rng(7)
    for k in (2, 3, 5, 6):
        arcs = [std_arc(rng.normal(size=100)) for _ in range(k)]
        got = ensemble_median(arcs).y
        assert got.tolist() == median_by_sort(list(zip(*[a.y.tolist() for a in arcs])))


@given(st.integers(2, 7), st.integers(1, 50), st.integers(0, 2**32 - 1))
def test_median_within_envelope(k, n, seed):
    rng = np.random.default_rng(seed)
    ys = rng.normal(size=(k, n))
    m = ensemble_median([std_arc(y) for y in ys]).y
    assert np.all(m >= ys.min(axis=0)) and np.all(m <= ys.max(axis=0))


def test_median_errors():
    with pytest.raises(TooFewArcs):
        ensemble_median([std_arc([1, 2])])
    with pytest.raises(LengthMismatch):
        ensemble_median([std_arc([1, 2]), std_arc([1, 2, 3])])
    smoothed = Arc.from_values([1, 2], stage="smoothed")
    with pytest.raises(StageError):
        ensemble_median([std_arc([1, 2]), smoothed])


def test_build_ensemble_excludes_constant(caplog):
    rng = np.random.default_rng(1)
    s = [series(rng.normal(size=40), f"m{i}") for i in range(3)] + [series(np.ones(40), "flat")]
    ens = build_ensemble(s)
    assert ens.excluded == ("flat",)
    assert [a.model.model_id for a in ens.arcs] == ["m0", "m1", "m2"]
    assert all(a.stage == "smoothed" for a in ens.arcs)
    assert "flat" in caplog.text


@given(
    arrays(float, st.integers(25, 300), elements=st.floats(-10, 10)),
    st.floats(0.01, 50),
    st.floats(-50, 50),
)
def test_pipeline_affine_invariant(x, a, b):
    if np.ptp(x) < 1e-2:
        return

    def through(v):
        return downsample_lttb(smooth(standardize(series(v))), 25)

    p, q = through(x), through(a * x + b)
    np.testing.assert_allclose(q.y, p.y, atol=1e-9)
    assert p.x.tolist() == q.x.tolist()


@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=80), finite, finite, finite, finite)
def test_lttb_bucket_pickers_agree(pts, ax, ay, cx, cy):
    from narrative_arcs.arcs import _pick_numpy, _pick_python

    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    args = (ax, ay, cx, cy, np.array(xs), np.array(ys), xs, ys, 0, len(xs))
    assert _pick_numpy(*args) == _pick_python(*args)
