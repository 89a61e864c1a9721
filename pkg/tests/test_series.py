import numpy as np
import pytest

from tsimg.errors import EmptyResultError, InvalidPeriodError, UnstableCoefficientError
from tsimg.series import (
    MultivariateSeries,
    chronological_split,
    destandardize,
    gen_ar1,
    gen_periodic,
    slide_windows,
    standardize_by_train,
)


def test_slide_windows_count():
    s = MultivariateSeries(np.arange(10.0)[None, :])
    wins = slide_windows(s, lookback=4, horizon=2, stride=1)
    assert len(wins) == 5  # 10 - 4 - 2 + 1


def test_slide_windows_contiguous_and_adjacent():
    s = MultivariateSeries(np.arange(20.0)[None, :])
    wins = slide_windows(s, lookback=3, horizon=2, stride=1)
    for i, w in enumerate(wins):
        assert np.array_equal(w.lookback[0], np.arange(i, i + 3, dtype=float))
        assert np.array_equal(w.target[0], np.arange(i + 3, i + 5, dtype=float))


def test_slide_windows_covers_all_indices():
    T = 30
    s = MultivariateSeries(np.arange(float(T))[None, :])
    wins = slide_windows(s, lookback=5, horizon=3, stride=1)
    seen = set()
    for w in wins:
        seen.update(int(v) for v in w.lookback[0])
        seen.update(int(v) for v in w.target[0])
    assert seen == set(range(T))


def test_slide_windows_too_short():
    s = MultivariateSeries(np.arange(5.0)[None, :])
    with pytest.raises(EmptyResultError):
        slide_windows(s, lookback=4, horizon=2)


def test_standardize_train_stats():
    tr = MultivariateSeries(np.array([[1.0, 2.0, 3.0]]))
    va = MultivariateSeries(np.array([[4.0, 5.0]]))
    te = MultivariateSeries(np.array([[6.0]]))
    tr2, va2, te2, stats = standardize_by_train(tr, va, te)
    assert abs(tr2.values.mean()) < 1e-9
    assert abs(tr2.values.std() - 1.0) < 1e-9
    # val transformed with train's stats, not its own
    assert abs(va2.values.mean()) > 1.0


def test_standardize_degenerate_variate():
    tr = MultivariateSeries(np.array([[5.0, 5.0, 5.0], [1.0, 2.0, 3.0]]))
    va = MultivariateSeries(tr.values.copy())
    te = MultivariateSeries(tr.values.copy())
    tr2, _, _, stats = standardize_by_train(tr, va, te)
    assert np.all(tr2.values[0] == 0.0)
    assert stats.degenerate.tolist() == [True, False]


def test_standardize_invertible():
    rng = np.random.default_rng(0)
    tr = MultivariateSeries(rng.normal(2.0, 3.0, size=(3, 50)))
    va = MultivariateSeries(rng.normal(size=(3, 10)))
    te = MultivariateSeries(rng.normal(size=(3, 10)))
    tr2, va2, te2, stats = standardize_by_train(tr, va, te)
    back = destandardize(va2, stats)
    assert np.max(np.abs(back.values - va.values)) < 1e-9


def test_chronological_split_sizes():
    s = MultivariateSeries(np.arange(100.0)[None, :])
    a, b, c = chronological_split(s)
    assert (a.length, b.length, c.length) == (70, 10, 20)
    assert a.values[0, 0] == 0.0 and c.values[0, -1] == 99.0


def test_gen_periodic_exact_periodicity():
    x = gen_periodic(24, 96, "sine")
    for s in (24, 48, 72):
        assert np.array_equal(x[: 96 - s], x[s:])


def test_gen_periodic_waveforms_and_determinism():
    for wf in ("sine", "sawtooth", "composite"):
        a = gen_periodic(12, 100, wf, seed=5, noise_std=0.1)
        b = gen_periodic(12, 100, wf, seed=5, noise_std=0.1)
        assert np.array_equal(a, b)


def test_gen_periodic_invalid_period():
    with pytest.raises(InvalidPeriodError):
        gen_periodic(0, 10)
    with pytest.raises(InvalidPeriodError):
        gen_periodic(11, 10)


def test_gen_ar1_autocorrelation():
    x = gen_ar1(0.9, 10000, seed=1)
    r1 = np.corrcoef(x[:-1], x[1:])[0, 1]
    assert 0.85 <= r1 <= 0.95
    white = gen_ar1(0.0, 10000, seed=2)
    r1w = np.corrcoef(white[:-1], white[1:])[0, 1]
    assert abs(r1w) < 0.05


def test_gen_ar1_unstable():
    with pytest.raises(UnstableCoefficientError):
        gen_ar1(1.0, 100)


def test_gen_ar1_deterministic():
    assert np.array_equal(gen_ar1(0.5, 500, seed=9), gen_ar1(0.5, 500, seed=9))
