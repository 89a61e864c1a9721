import numpy as np
import pytest

from tsimg.errors import (
    EmbeddingTooLargeError,
    NotSquareError,
    SeriesTooShortError,
    WindowTooLongError,
)
from tsimg.imaging import (
    GrayImage,
    detect_period,
    filterbank_spectrogram,
    gaf,
    gaf_diag_inverse,
    lineplot_raster,
    morlet_fourier_period,
    mvh,
    recurrence_plot,
    stft_spectrogram,
    uvh,
    uvh_inverse,
    wavelet_scalogram,
    _triangular_filterbank,
)
from tsimg.series import MultivariateSeries, gen_periodic


# --- period detection ---------------------------------------------------

def test_detect_period_pure_sine():
    x = gen_periodic(24, 1152, "sine")
    est = detect_period(x)
    assert est.chosen_L == 24


@pytest.mark.parametrize("L,T", [(12, 480), (7, 700), (50, 2000)])
def test_detect_period_various(L, T):
    x = gen_periodic(L, T, "sine")
    assert detect_period(x).chosen_L == L


def test_detect_period_constant_degenerate():
    est = detect_period(np.ones(64))
    assert est.degenerate
    assert est.chosen_L == 64


def test_detect_period_too_short():
    with pytest.raises(SeriesTooShortError):
        detect_period(np.array([1.0, 2.0, 3.0]))


def test_detect_period_tie_prefers_longer_period():
    # two equal-amplitude sinusoids at bin frequencies 4 and 8 over T=64
    t = np.arange(64)
    x = np.sin(2 * np.pi * 4 * t / 64) + np.sin(2 * np.pi * 8 * t / 64)
    assert detect_period(x).chosen_L == 16  # ceil(64/4)


# --- UVH ----------------------------------------------------------------

def test_uvh_stacking():
    img = uvh(np.arange(1.0, 9.0), 4)
    assert img.pixels.shape == (4, 2)
    assert np.array_equal(img.pixels[:, 0], [1, 2, 3, 4])
    assert np.array_equal(img.pixels[:, 1], [5, 6, 7, 8])


def test_uvh_padding():
    img = uvh(np.arange(1.0, 8.0), 4)
    assert img.pixels.shape == (4, 2)
    assert img.meta["pad"] == 1
    assert img.pixels[0, 0] == 1.0  # pad uses the first observed value


def test_uvh_round_trip_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        T = int(rng.integers(1, 200))
        L = int(rng.integers(1, 40))
        x = rng.normal(size=T)
        assert np.array_equal(uvh_inverse(uvh(x, L), T), x)


# --- MVH ----------------------------------------------------------------

def test_mvh_identity_layout():
    v = np.arange(6.0).reshape(2, 3)
    img = mvh(MultivariateSeries(v))
    assert np.array_equal(img.pixels, v)


# --- GAF ----------------------------------------------------------------

def test_gaf_extremes():
    img, ctx = gaf(np.array([0.0, 1.0]))
    assert img.pixels[1, 1] == pytest.approx(1.0)    # x_hat = 1 -> cos(0)
    assert img.pixels[0, 0] == pytest.approx(-1.0)   # x_hat = 0 -> cos(pi)


def test_gaf_symmetry_range_diagonal():
    rng = np.random.default_rng(1)
    x = rng.normal(size=30)
    img, ctx = gaf(x)
    p = img.pixels
    assert np.allclose(p, p.T)
    assert p.min() >= -1.0 - 1e-12 and p.max() <= 1.0 + 1e-12
    xh = (x - ctx.min) / (ctx.max - ctx.min)
    assert np.allclose(np.diagonal(p), 2 * xh * xh - 1, atol=1e-12)


def test_gaf_degenerate_midpoint():
    img, ctx = gaf(np.full(5, 3.0))
    assert ctx.degenerate
    # x_hat = 0.5 -> cos(2 arccos(.5)) = -0.5 on the diagonal
    assert np.allclose(np.diagonal(img.pixels), -0.5)


def test_gaf_diag_inverse_round_trip():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.normal(size=25)
        img, ctx = gaf(x)
        assert np.max(np.abs(gaf_diag_inverse(img, ctx) - x)) < 1e-9


def test_gaf_diag_inverse_bounds():
    img, ctx = gaf(np.array([2.0, 5.0, 3.0]))
    assert gaf_diag_inverse(GrayImage(np.eye(3)), ctx).max() == pytest.approx(5.0)
    assert gaf_diag_inverse(GrayImage(-np.eye(3) * 1.0), ctx).min() == pytest.approx(2.0)
    with pytest.raises(NotSquareError):
        gaf_diag_inverse(GrayImage(np.zeros((2, 3))), ctx)


# --- recurrence plot ----------------------------------------------------

def test_rp_constant_series_zero():
    img = recurrence_plot(np.full(10, 2.0))
    assert np.all(img.pixels == 0.0)


def test_rp_symmetric_zero_diag():
    rng = np.random.default_rng(4)
    img = recurrence_plot(rng.normal(size=20), embed_dim=3, delay=2)
    p = img.pixels
    assert p.shape == (16, 16)
    assert np.allclose(p, p.T)
    assert np.all(np.diagonal(p) == 0.0)
    assert np.all(p >= 0.0)


def test_rp_periodic_off_diagonal_zero():
    x = gen_periodic(8, 40, "sawtooth")
    p = recurrence_plot(x, embed_dim=1, delay=1).pixels
    assert np.all(np.diagonal(p, offset=8) == 0.0)


def test_rp_embedding_too_large():
    with pytest.raises(EmbeddingTooLargeError):
        recurrence_plot(np.arange(5.0), embed_dim=3, delay=3)


# --- STFT ---------------------------------------------------------------

def test_stft_shape_and_zero_input():
    img = stft_spectrogram(np.zeros(128), window_len=32, hop=16)
    assert img.pixels.shape == (17, (128 - 32) // 16 + 1)
    assert np.all(img.pixels == 0.0)


def test_stft_pure_sine_dominant_row():
    T, win = 512, 64
    t = np.arange(T)
    for bin_f in (4, 8, 16):
        x = np.sin(2 * np.pi * bin_f * t / win)
        img = stft_spectrogram(x, window_len=win, hop=32)
        assert np.argmax(img.pixels.mean(axis=1)) == bin_f


def test_stft_window_too_long():
    with pytest.raises(WindowTooLongError):
        stft_spectrogram(np.zeros(10), window_len=20)


# --- wavelet ------------------------------------------------------------

def test_wavelet_zero_and_linearity():
    z = wavelet_scalogram(np.zeros(64), num_scales=8)
    assert np.all(z.pixels == 0.0)
    rng = np.random.default_rng(5)
    x = rng.normal(size=64)
    a = wavelet_scalogram(x, num_scales=8).pixels
    b = wavelet_scalogram(3.0 * x, num_scales=8).pixels
    assert np.allclose(b, 3.0 * a, atol=1e-9)


def test_wavelet_sine_peaks_near_period():
    T, period = 512, 32
    x = np.sin(2 * np.pi * np.arange(T) / period)
    img = wavelet_scalogram(x, num_scales=32)
    scales = img.meta["scales"]
    best_row = int(np.argmax(img.pixels.mean(axis=1)))
    expected = int(np.argmin(np.abs(
        np.array([morlet_fourier_period(s) for s in scales]) - period)))
    assert abs(best_row - expected) <= 1


# --- filterbank ---------------------------------------------------------

def test_filterbank_zero_input():
    img = filterbank_spectrogram(np.zeros(128), window_len=32, hop=16, n_filters=8)
    assert img.pixels.shape[0] == 8
    assert np.all(img.pixels == 0.0)


def test_filterbank_weights_positive():
    fb = _triangular_filterbank(8, 33)
    assert np.all(fb.sum(axis=1) > 0.0)


def test_filterbank_sine_energy_location():
    T, win = 512, 64
    bin_f = 16  # middle of the 33-bin axis
    x = np.sin(2 * np.pi * bin_f * np.arange(T) / win)
    img = filterbank_spectrogram(x, window_len=win, hop=32, n_filters=8)
    best = int(np.argmax(img.pixels.mean(axis=1)))
    fb = _triangular_filterbank(8, win // 2 + 1)
    assert fb[best, bin_f] > 0.0  # winning filter covers the sine's bin


# --- line plot ----------------------------------------------------------

def test_lineplot_constant_midline():
    img = lineplot_raster(np.full(10, 7.0), height=9, width=12)
    assert np.array_equal(np.nonzero(img.pixels.any(axis=1))[0], [4])


def test_lineplot_binary_and_diagonal():
    img = lineplot_raster(np.array([0.0, 1.0]), height=8, width=8)
    assert set(np.unique(img.pixels)) <= {0.0, 1.0}
    assert img.pixels[7, 0] == 1.0 and img.pixels[0, 7] == 1.0
    # an 8-connected path exists: every column holds at least one pixel
    assert np.all(img.pixels.any(axis=0))
