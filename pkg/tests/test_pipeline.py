import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_windows
from rnndcor import pipeline, tsgen
from rnndcor.errors import DegenerateSeriesError, InsufficientDataError, UserInputError


def test_standardize_small():
    s = pipeline.standardize(np.array([2.0, 4.0, 6.0]))
    assert s.mean == 4.0
    assert s.std == pytest.approx(np.sqrt(8 / 3), abs=1e-15)   # population divisor
    assert abs(s.values.mean()) < 1e-15


def test_standardize_constant():
    with pytest.raises(DegenerateSeriesError):
        pipeline.standardize(np.full(10, 3.0))


def test_standardize_fit_on_train_segment():
    z = tsgen.gen_ar(tsgen.ArParams((0.8,)), tsgen.NoiseSpec(seed=0), 4000)
    tr, _ = pipeline.split(4000, 0.8, 21)
    s = pipeline.standardize(z, (tr.start, tr.stop))
    seg = s.values[tr.start:tr.stop]
    assert abs(seg.mean()) < 1e-9 and abs(seg.std() - 1) < 1e-9
    # the test segment is transformed with the training statistics
    np.testing.assert_array_equal(s.values[3200:], (z.values[3200:] - s.mean) / s.std)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=60), st.integers(0, 1000))
def test_round_trip(values, seed):
    z = np.array(values)
    if np.std(z) == 0:
        return
    s = pipeline.standardize(z)
    back = s.destandardize()
    np.testing.assert_allclose(back, z, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(z).max()))


def test_split_examples():
    tr, te = pipeline.split(4000, 0.8)
    assert (len(tr), len(te)) == (3200, 800)
    tr, te = pipeline.split(10, 0.8)
    assert (len(tr), len(te)) == (8, 2)
    with pytest.raises(InsufficientDataError):
        pipeline.split(10, 0.8, min_segment=5 + 1)


@pytest.mark.parametrize("ratio", [0.0, 1.0, -0.1, 1.5])
def test_split_bad_ratio(ratio):
    with pytest.raises(UserInputError):
        pipeline.split(100, ratio)


def test_make_samples_examples():
    s = pipeline.make_samples(np.arange(1, 11), 5, 1)
    assert s.n == 5
    np.testing.assert_array_equal(s.X[0], [1, 2, 3, 4, 5])
    np.testing.assert_array_equal(s.Y[0], [6])

    s = pipeline.make_samples(np.arange(1, 7), 5, 1)
    assert s.n == 1

    s = pipeline.make_samples(np.arange(1, 11), 5, 2)
    assert s.n == 4
    np.testing.assert_array_equal(s.X[-1], [4, 5, 6, 7, 8])
    np.testing.assert_array_equal(s.Y[-1], [9, 10])


def test_make_samples_too_short():
    with pytest.raises(InsufficientDataError):
        pipeline.make_samples(np.arange(5), 5, 1)


def test_window_count_exhaustive():
    for L in range(2, 51):
        v = np.arange(1.0, L + 1)
        for T in range(1, L):
            for H in range(1, L - T + 1):
                s = pipeline.make_samples(v, T, H)
                xs, ys = naive_windows(list(v), T, H)
                assert s.n == L - T - H + 1 == len(xs)
                np.testing.assert_array_equal(s.X, xs)
                np.testing.assert_array_equal(s.Y, ys)


@settings(max_examples=50, deadline=None)
@given(L=st.integers(2, 80), T=st.integers(1, 20), H=st.integers(1, 4), start=st.integers(0, 500))
def test_windows_cover_segment(L, T, H, start):
    if L < T + H:
        return
    v = np.random.default_rng(L).standard_normal(L)
    s = pipeline.make_samples(v, T, H, start=start)
    seen = np.zeros(L, dtype=bool)
    for i, off in enumerate(s.offsets - start):
        np.testing.assert_array_equal(np.concatenate([s.X[i], s.Y[i]]), v[off:off + T + H])
        seen[off:off + T + H] = True
    assert seen.all()
    np.testing.assert_array_equal(s.target_index, s.offsets + T)


def test_no_leakage():
    z = tsgen.gen_ar(tsgen.ArParams((0.8,)), tsgen.NoiseSpec(seed=1), 400)
    tr, te = pipeline.split(400, 0.8, 21)
    std = pipeline.standardize(z, (tr.start, tr.stop))
    train = pipeline.segment_samples(std, tr, 20, 1)
    test = pipeline.segment_samples(std, te, 20, 1)
    assert (train.offsets + 20 + 1 - 1).max() < te.start
    assert test.offsets.min() == te.start


def test_sample_csv(tmp_path):
    s = pipeline.make_samples(np.arange(1.0, 8.0), 3, 2)
    f = tmp_path / "s.csv"
    s.to_csv(f)
    lines = f.read_text().splitlines()
    assert lines[0] == "x1,x2,x3,y1,y2"
    assert len(lines) == 1 + s.n
    assert lines[1] == "1.0,2.0,3.0,4.0,5.0"
