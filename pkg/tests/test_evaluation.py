import math

import numpy as np
import pytest

from tsimg.errors import (
    DivByZeroError,
    NonIntegerSegmentError,
    NonPositiveError,
    ShapeMismatchError,
    TooShortError,
)
from tsimg.evaluation import (
    ForecastTask,
    PerturbMode,
    PERTURB_KINDS,
    _split_windows,
    metric_accuracy,
    metric_mae,
    metric_mse,
    minmax_normalize,
    performance_drop,
    perturb,
    reoccurrence_brute_force,
    reoccurrence_n,
)
from tsimg.series import MultivariateSeries


# --- metrics vs naive double-loop oracles --------------------------------

def _naive_mse(pred, truth):
    total, count = 0.0, 0
    for i in range(pred.shape[0]):
        for j in range(pred.shape[1]):
            total += (pred[i, j] - truth[i, j]) ** 2
            count += 1
    return total / count


def _naive_mae(pred, truth):
    total, count = 0.0, 0
    for i in range(pred.shape[0]):
        for j in range(pred.shape[1]):
            total += abs(pred[i, j] - truth[i, j])
            count += 1
    return total / count


def test_metrics_match_naive_oracle():
    rng = np.random.default_rng(0)
    for _ in range(30):
        d, t = int(rng.integers(1, 6)), int(rng.integers(1, 30))
        pred = rng.normal(size=(d, t))
        truth = rng.normal(size=(d, t))
        assert abs(metric_mse(pred, truth) - _naive_mse(pred, truth)) < 1e-12
        assert abs(metric_mae(pred, truth) - _naive_mae(pred, truth)) < 1e-12


def test_metric_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        metric_mse(np.zeros(3), np.zeros(4))
    with pytest.raises(ShapeMismatchError):
        metric_accuracy([1, 2], [1])


def test_metric_accuracy_values():
    assert metric_accuracy([0, 1, 2, 1], [0, 1, 1, 1]) == 0.75
    assert metric_accuracy([5], [5]) == 1.0


# --- perturbations -------------------------------------------------------

def _series(T=20, d=2, seed=0):
    rng = np.random.default_rng(seed)
    return MultivariateSeries(rng.normal(size=(d, T)))


def test_perturb_preserves_multiset():
    s = _series()
    for kind in ("sf_all", "sf_half", "ex_half"):
        out = perturb(s, PerturbMode(kind, seed=1))
        for v in range(2):
            assert sorted(out.values[v]) == pytest.approx(sorted(s.values[v]))


def test_perturb_joint_across_variates():
    # same permutation for every variate: equal variates stay equal
    base = np.arange(10.0)
    s = MultivariateSeries(np.stack([base, base]))
    for kind in PERTURB_KINDS:
        out = perturb(s, PerturbMode(kind, seed=2))
        assert np.array_equal(out.values[0], out.values[1])


def test_perturb_sf_half_keeps_tail():
    s = _series(T=11)
    out = perturb(s, PerturbMode("sf_half", seed=3))
    assert np.array_equal(out.values[:, 5:], s.values[:, 5:])


def test_perturb_ex_half_even_is_involution():
    s = _series(T=16)
    mode = PerturbMode("ex_half")
    assert np.array_equal(perturb(perturb(s, mode), mode).values, s.values)


def test_perturb_ex_half_odd_rotation():
    s = MultivariateSeries(np.arange(5.0)[None, :])
    out = perturb(s, PerturbMode("ex_half"))
    assert np.array_equal(out.values[0], [3.0, 4.0, 0.0, 1.0, 2.0])


def test_perturb_masking_zero_count():
    s = _series(T=21)
    out = perturb(s, PerturbMode("masking", seed=4))
    zeroed = np.all(out.values == 0.0, axis=0)
    assert zeroed.sum() == 10  # floor(21/2)


def test_perturb_deterministic_and_validated():
    s = _series()
    a = perturb(s, PerturbMode("sf_all", seed=7))
    b = perturb(s, PerturbMode("sf_all", seed=7))
    assert np.array_equal(a.values, b.values)
    with pytest.raises(ShapeMismatchError):
        PerturbMode("reverse")
    with pytest.raises(TooShortError):
        perturb(MultivariateSeries(np.ones((1, 1))), PerturbMode("sf_all"))


# --- performance drop ----------------------------------------------------

def test_performance_drop_directions():
    assert performance_drop(0.90, 0.45, better="higher") == pytest.approx(50.0)
    assert performance_drop(1.0, 1.5, better="lower") == pytest.approx(50.0)
    assert performance_drop(1.0, 0.5, better="lower") == pytest.approx(-50.0)
    with pytest.raises(DivByZeroError):
        performance_drop(0.0, 1.0)
    with pytest.raises(ShapeMismatchError):
        performance_drop(1.0, 1.0, better="sideways")


# --- segment reoccurrence ------------------------------------------------

def test_reoccurrence_closed_form_cases():
    assert reoccurrence_n(1, 2) == 2    # half-period segments: n = 2
    assert reoccurrence_n(2, 2) == 1    # full period: immediate
    assert reoccurrence_n(3, 2) == 2
    assert reoccurrence_n(1, 4) == 4
    assert reoccurrence_n(6, 4) == 2
    with pytest.raises(NonPositiveError):
        reoccurrence_n(0, 2)


def test_reoccurrence_brute_force_matches_closed_form():
    L = 24
    for k in (2, 3, 4):
        for i in range(1, 3 * k + 1):
            assert reoccurrence_brute_force(i, k, L) == reoccurrence_n(i, k)


def test_reoccurrence_brute_force_rejects_fractional():
    with pytest.raises(NonIntegerSegmentError):
        reoccurrence_brute_force(1, 5, 24)


# --- sweep plumbing ------------------------------------------------------

def test_minmax_normalize():
    assert minmax_normalize([2.0, 4.0, 3.0]) == [0.0, 1.0, 0.5]
    assert minmax_normalize([5.0, 5.0]) == [0.0, 0.0]


def test_split_windows_chronological():
    task = ForecastTask(series=np.arange(100.0), lookback=5, horizon=2,
                        stride=1)
    tr, va, te = _split_windows(task)
    assert len(tr) == 70 - 5 - 2 + 1
    assert len(va) == 10 - 5 - 2 + 1
    assert len(te) == 20 - 5 - 2 + 1
    # first test window starts where the test block starts
    assert te[0][0][0] == 80.0
    # no window crosses a block boundary
    assert tr[-1][1][-1] == 69.0
