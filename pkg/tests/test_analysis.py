import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rnndcor import analysis, pipeline
from rnndcor.analysis import DcorProfile, RunSummary
from rnndcor.errors import (
    AlignmentError,
    DegenerateProfileError,
    DegenerateTargetsError,
    EmptyIntersection,
    SampleCountMismatchError,
    UserInputError,
)
from rnndcor.rnn import ActivationTensor


def acts_from(layers, target_index=None):
    return ActivationTensor(np.asarray(layers, dtype=float), epoch=1, target_index=target_index)


# ---- profiles

def test_profile_of_replicated_targets_is_one():
    Y = np.random.default_rng(0).standard_normal((50, 1))
    layers = np.repeat(np.repeat(Y[None], 4, axis=2), 3, axis=0)   # (T=3, n, b=4)
    prof = analysis.layer_profile(acts_from(layers), Y)
    np.testing.assert_allclose(prof.values, 1.0, atol=1e-12)


def test_profile_of_independent_noise_is_small():
    worst = 0.0
    for s in range(20):
        rng = np.random.default_rng(s)
        prof = analysis.layer_profile(acts_from(rng.standard_normal((3, 800, 4))), rng.standard_normal(800))
        worst = max(worst, prof.max_r)
    assert worst < 0.25


def test_profile_sample_mismatch():
    with pytest.raises(SampleCountMismatchError):
        analysis.layer_profile(acts_from(np.zeros((2, 10, 3))), np.zeros(9))


def test_profile_subsampling_is_seeded():
    rng = np.random.default_rng(1)
    layers, Y = rng.standard_normal((2, 300, 3)), rng.standard_normal(300)
    a = analysis.layer_profile(acts_from(layers), Y, max_samples=100, seed=4)
    b = analysis.layer_profile(acts_from(layers), Y, max_samples=100, seed=4)
    full = analysis.layer_profile(acts_from(layers), Y)
    assert np.array_equal(a.values, b.values) and not np.array_equal(a.values, full.values)
    idx = analysis._subsample_idx(300, 100, 4)
    direct = analysis.layer_profile(acts_from(layers[:, idx]), Y[idx])
    assert np.array_equal(a.values, direct.values)


def test_acf_alignment_examples():
    acf = np.arange(21) / 100.0
    pairs = analysis.acf_alignment(20, acf)
    assert pairs[15][:2] == (16, 5)
    assert pairs[19][:2] == (20, 1) and pairs[19][2] == 0.01
    assert analysis.acf_alignment(5, acf)[0][:2] == (1, 5)
    with pytest.raises(UserInputError):
        analysis.acf_alignment(20, acf[:10])


def test_attach_acf_orders_lags_by_layer():
    z = np.random.default_rng(3).standard_normal(500).cumsum()
    prof = analysis.attach_acf(DcorProfile(np.linspace(0.1, 0.9, 5)), z)
    from rnndcor import estat
    rho = estat.acf(z, 5)
    np.testing.assert_array_equal(prof.acf, rho[[5, 4, 3, 2, 1]])
    assert prof.rows()[0] == (1, 0.1, 5, float(rho[5]))


# ---- information loss

def test_info_loss_examples():
    assert analysis.info_loss([0.1, 0.5, 0.9, 0.95]) == 0.0
    assert round(analysis.info_loss([0.2, 0.964, 0.5, 0.356])) == 63
    assert analysis.info_loss([0.4] * 6) == 0.0
    with pytest.raises(DegenerateProfileError):
        analysis.info_loss([0.0, 0.0])
    with pytest.raises(DegenerateProfileError):
        analysis.info_loss([])


@settings(max_examples=100)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=30))
def test_info_loss_bounds(values):
    if max(values) == 0:
        return
    v = analysis.info_loss(values)
    assert 0.0 <= v <= 100.0


# ---- grids and alignment

def test_self_grid_symmetric_unit_diagonal():
    a = acts_from(np.random.default_rng(2).standard_normal((6, 40, 5)).cumsum(axis=0))
    g = analysis.cross_model_grid(a, a).grid
    assert np.max(np.abs(g - g.T)) < 1e-9
    np.testing.assert_allclose(np.diag(g), 1.0, atol=1e-9)
    assert np.all((g >= 0) & (g <= 1))


def test_grid_rejects_misaligned():
    a = acts_from(np.zeros((2, 10, 3)) + np.arange(10)[None, :, None], np.arange(10))
    with pytest.raises(AlignmentError):
        analysis.cross_model_grid(a, acts_from(np.zeros((2, 9, 3))))
    with pytest.raises(AlignmentError):
        analysis.cross_model_grid(a, acts_from(a.layers, np.arange(1, 11)))


def _segment_sets(T1, T2, seg=range(3200, 4000), H=1):
    std = pipeline.standardize(np.random.default_rng(0).standard_normal(4000))
    return pipeline.segment_samples(std, seg, T1, H), pipeline.segment_samples(std, seg, T2, H)


def test_align_windows_different_T():
    s6, s10 = _segment_sets(6, 10)
    i1, i2 = analysis.align_windows(s6, s10)
    assert i1.size == i2.size == 800 - 10
    np.testing.assert_array_equal(s6.target_index[i1], s10.target_index[i2])
    np.testing.assert_array_equal(s6.Y[i1], s10.Y[i2])
    # the longer window keeps every sample; the shorter drops its first T2 - T1
    np.testing.assert_array_equal(i2, np.arange(790))
    np.testing.assert_array_equal(i1, np.arange(4, 794))


def test_align_windows_identity_and_disjoint():
    s, _ = _segment_sets(5, 5)
    i1, i2 = analysis.align_windows(s, s)
    np.testing.assert_array_equal(i1, np.arange(s.n))
    np.testing.assert_array_equal(i1, i2)
    a, _ = _segment_sets(5, 5, seg=range(0, 100))
    b, _ = _segment_sets(5, 5, seg=range(200, 300))
    with pytest.raises(EmptyIntersection):
        analysis.align_windows(a, b)


@settings(max_examples=30, deadline=None)
@given(T1=st.integers(1, 12), T2=st.integers(1, 12), lo=st.integers(0, 50))
def test_alignment_yields_identical_targets(T1, T2, lo):
    s1, s2 = _segment_sets(T1, T2, seg=range(lo, lo + 60))
    i1, i2 = analysis.align_windows(s1, s2)
    np.testing.assert_array_equal(s1.Y[i1], s2.Y[i2])
    assert i1.size == 60 - max(T1, T2)


def test_diagonal_means_and_streak_period():
    # layers of model 2 repeat with period 6 relative to model 1, offset by shift 10
    T1, T2, shift = 10, 20, 10
    g = np.full((T1, T2), 0.2)
    for v in range(T1):
        for m in range(T2):
            k = m - v - shift
            if k <= 0 and k % 6 == 0:
                g[v, m] = 0.9 - 0.05 * (-k // 6)
    dm = analysis.diagonal_means(g, shift)
    assert max(dm, key=dm.get) == 0
    offsets = analysis.streak_offsets(g, shift)
    assert set(np.unique(offsets)) <= {0, -6, -12, -18}
    assert analysis.streak_period(g, shift) == 6
    assert analysis.streak_period(np.eye(5)) is None


# ---- metrics and aggregation

def test_eval_metrics_examples():
    assert analysis.eval_metrics([1.0, 2.0], [1.0, 2.0]) == (0.0, 0.0, 0)
    mse, mape, skipped = analysis.eval_metrics([2.0, 4.0], [1.0, 2.0])
    assert (mse, mape, skipped) == (2.5, 1.0, 0)
    mse, mape, skipped = analysis.eval_metrics([1.0, 3.0, 1.0], [0.0, 2.0, 1.0])
    assert mse == pytest.approx(2 / 3) and mape == pytest.approx(0.25) and skipped == 1
    with pytest.raises(DegenerateTargetsError):
        analysis.eval_metrics([1.0], [0.0])


def test_destandardize_predictions():
    y = np.array([0.5, -1.0])
    np.testing.assert_array_equal(analysis.destandardize_predictions(y, 0.0, 1.0), y)
    assert analysis.destandardize_predictions(0.0, 3.5, 2.0) == 3.5
    z = np.random.default_rng(0).standard_normal(30) * 4 + 7
    s = pipeline.standardize(z)
    np.testing.assert_allclose(analysis.destandardize_predictions(s.values, s.mean, s.std), z, atol=1e-12)


def run(mse=0.02, profile=(0.5, 0.9, 0.8), seed=0):
    return RunSummary.build(mse, 0.3, DcorProfile(np.array(profile)), seed)


def test_run_summary_invariant():
    r = run()
    assert r.max_r == 0.9 and r.final_r == 0.8
    assert r.info_loss_pct == pytest.approx(100 * (0.9 - 0.8) / 0.9)


def test_aggregate_examples():
    a = analysis.aggregate([run()])
    assert a.std["mse"] == 0.0 and a.mean["mse"] == 0.02 and a.runs == 1
    a = analysis.aggregate([run(0.02), run(0.03, seed=1)])
    assert a.mean["mse"] == pytest.approx(0.025) and a.std["mse"] == pytest.approx(0.00707, abs=1e-5)
    a = analysis.aggregate([run(0.1)] * 50)
    assert all(v == 0.0 for v in a.std.values())
    assert a.mean["mse"] == 0.1
    np.testing.assert_allclose(a.mean_profile, [0.5, 0.9, 0.8])
    with pytest.raises(UserInputError):
        analysis.aggregate([])


def test_table_row_rounds_change():
    row = analysis.aggregate([run(profile=(0.964, 0.5, 0.356))]).table_row("AR(20)")
    assert row["change_pct"] == "63" and row["max_r"] == "0.964"


def test_profile_csv(tmp_path):
    f = tmp_path / "p.csv"
    analysis.write_profile_csv(f, [0.5, 0.25], [0.1, 0.2], precision=3)
    rows = list(csv.reader(f.open(newline="")))
    assert rows == [["layer", "dcor", "acf_lag", "acf"], ["1", "0.500", "2", "0.100"], ["2", "0.250", "1", "0.200"]]
    assert f.read_bytes().count(b"\r\n") == 3


def test_heatmap_csv(tmp_path):
    f = tmp_path / "g.csv"
    analysis.HeatmapGrid(np.array([[1.0, 0.5], [0.5, 1.0]]), ("a", "b")).to_csv(f, precision=2)
    rows = list(csv.reader(f.open(newline="")))
    assert rows == [["a\\b", "L1", "L2"], ["L1", "1.00", "0.50"], ["L2", "0.50", "1.00"]]
