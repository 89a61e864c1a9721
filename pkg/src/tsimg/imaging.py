"""The eight time-series-to-image transforms plus FFT period detection.

All transforms are deterministic and return a :class:`GrayImage`. Where a
transform is used together with its inverse downstream (UVH, GAF diagonal),
the inverse lives next to it here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmbeddingTooLargeError,
    InvalidLError,
    LengthMismatchError,
    NotSquareError,
    SeriesTooShortError,
    ShapeMismatchError,
    WindowTooLongError,
)
from .series import MultivariateSeries


@dataclass
class GrayImage:
    """Single-channel real image; row index is the vertical axis."""

    pixels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2 or min(self.pixels.shape) < 1:
            raise ShapeMismatchError(f"expected 2-D image, got shape {self.pixels.shape}")
        if not np.all(np.isfinite(self.pixels)):
            raise ShapeMismatchError("image contains NaN/Inf")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass
class PeriodEstimate:
    """Top-k candidate periods from the FFT amplitude spectrum."""

    top_periods: list[int]
    chosen_L: int
    degenerate: bool = False


@dataclass
class GafContext:
    """Look-back extrema used for the GAF min-max scaling; required to map
    reconstructed diagonal entries back to raw values."""

    min: float
    max: float
    degenerate: bool = False


def detect_period(x: np.ndarray, top_k: int = 3) -> PeriodEstimate:
    """Dominant-period detection via the FFT amplitude spectrum.

    Considers frequencies f in [1, T//2] (DC excluded), converts each to a
    period ceil(T/f), and picks the max-amplitude frequency. Amplitude ties
    break toward the lower frequency, i.e. the longer period. A flat
    spectrum (constant input) yields f=1, L=T with the degenerate flag set.
    """
    x = np.asarray(x, dtype=np.float64)
    T = x.size
    if T < 4:
        raise SeriesTooShortError(f"need T >= 4, got {T}")
    if top_k < 1:
        raise ShapeMismatchError("top_k >= 1 required")
    spec = np.abs(np.fft.rfft(x))
    fmax = T // 2
    amps = spec[1:fmax + 1]  # f = 1 .. T//2
    if np.allclose(amps, 0.0):
        return PeriodEstimate(top_periods=[T], chosen_L=T, degenerate=True)
    # stable sort on -amplitude keeps lower f first among ties; quantize to
    # a relative 1e-9 so float noise cannot hide an exact-amplitude tie
    quantized = np.round(amps / amps.max(), 9)
    order = np.argsort(-quantized, kind="stable")
    freqs = order[:top_k] + 1
    periods = [math.ceil(T / int(f)) for f in freqs]
    return PeriodEstimate(top_periods=periods, chosen_L=periods[0])


def uvh(x: np.ndarray, L: int) -> GrayImage:
    """Univariate heatmap: left-pad to a multiple of L with the first
    observed value, then stack length-L segments as columns."""
    x = np.asarray(x, dtype=np.float64)
    if L < 1:
        raise InvalidLError(f"L must be >= 1, got {L}")
    T = x.size
    cols = -(-T // L)  # ceil
    pad = cols * L - T
    padded = np.concatenate([np.full(pad, x[0]), x]) if pad else x
    img = padded.reshape(cols, L).T
    return GrayImage(img.copy(), meta={"pad": pad, "pad_value": float(x[0])})


def uvh_inverse(img: GrayImage, original_length: int) -> np.ndarray:
    """Unstack UVH columns in order and drop the left pad."""
    total = img.height * img.width
    if total < original_length:
        raise LengthMismatchError(
            f"image holds {total} values < requested {original_length}")
    flat = img.pixels.T.reshape(-1)
    return flat[total - original_length:].copy()


def mvh(X: MultivariateSeries) -> GrayImage:
    """Multivariate heatmap: the (d, T) matrix rendered directly."""
    return GrayImage(X.values.copy())


def gaf(x: np.ndarray) -> tuple[GrayImage, GafContext]:
    """Gramian angular field (summation form).

    Min-max scales x to [0, 1], maps to angles phi = arccos(x_hat) and
    returns the T x T matrix cos(phi_i + phi_j). A constant input has no
    range; every x_hat is set to the midpoint 0.5 and the context flagged.
    """
    x = np.asarray(x, dtype=np.float64)
    lo, hi = float(x.min()), float(x.max())
    degenerate = hi == lo
    if degenerate:
        xh = np.full(x.size, 0.5)
    else:
        xh = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    comp = np.sqrt(np.clip(1.0 - xh * xh, 0.0, None))
    img = np.outer(xh, xh) - np.outer(comp, comp)
    return GrayImage(img), GafContext(min=lo, max=hi, degenerate=degenerate)


def gaf_diag_inverse(img: GrayImage, ctx: GafContext) -> np.ndarray:
    """Recover values from the GAF diagonal: G_ii = 2*x_hat_i^2 - 1.

    Output is bounded by [ctx.min, ctx.max] by construction; diagonal
    entries outside [-1, 1] (reconstruction drift) are clamped first.
    """
    if img.height != img.width:
        raise NotSquareError(f"image is {img.height}x{img.width}")
    diag = np.clip(np.diagonal(img.pixels), -1.0, 1.0)
    xh = np.sqrt((diag + 1.0) / 2.0)
    return ctx.min + xh * (ctx.max - ctx.min)


def recurrence_plot(x: np.ndarray, embed_dim: int = 1, delay: int = 1) -> GrayImage:
    """Unthresholded recurrence plot: pairwise Euclidean distances between
    delay-embedded states."""
    x = np.asarray(x, dtype=np.float64)
    m = x.size - (embed_dim - 1) * delay
    if m < 1:
        raise EmbeddingTooLargeError(
            f"embedding (dim={embed_dim}, delay={delay}) leaves no states for T={x.size}")
    states = np.stack([x[j * delay:j * delay + m] for j in range(embed_dim)], axis=1)
    diff = states[:, None, :] - states[None, :, :]
    return GrayImage(np.sqrt((diff * diff).sum(axis=2)))


def stft_spectrogram(x: np.ndarray, window_len: int | None = None,
                     hop: int | None = None) -> GrayImage:
    """Hann-windowed magnitude spectrogram with log(1+|S|) compression.

    Rows are frequencies (window_len//2 + 1 of them), columns are frames.
    """
    x = np.asarray(x, dtype=np.float64)
    T = x.size
    if window_len is None:
        window_len = min(64, T)
    if hop is None:
        hop = max(1, window_len // 2)
    if window_len > T:
        raise WindowTooLongError(f"window {window_len} > series length {T}")
    if hop < 1:
        raise ShapeMismatchError("hop >= 1 required")
    win = np.hanning(window_len)
    n_frames = (T - window_len) // hop + 1
    frames = np.stack([x[i * hop:i * hop + window_len] * win for i in range(n_frames)])
    mag = np.abs(np.fft.rfft(frames, axis=1)).T  # (bins, frames)
    return GrayImage(np.log1p(mag))


def _stft_magnitude(x: np.ndarray, window_len: int, hop: int) -> np.ndarray:
    win = np.hanning(window_len)
    n_frames = (x.size - window_len) // hop + 1
    frames = np.stack([x[i * hop:i * hop + window_len] * win for i in range(n_frames)])
    return np.abs(np.fft.rfft(frames, axis=1)).T


def morlet_fourier_period(scale: float, w0: float = 6.0) -> float:
    """Equivalent Fourier period of a Morlet wavelet at a given scale."""
    return 4.0 * np.pi * scale / (w0 + np.sqrt(2.0 + w0 * w0))


def wavelet_scalogram(x: np.ndarray, num_scales: int = 32) -> GrayImage:
    """Morlet CWT magnitude over dyadically spaced scales.

    Row j uses scale s0 * 2^(j*dj); the scale list is stored in meta so
    callers can map rows back to equivalent Fourier periods.
    """
    x = np.asarray(x, dtype=np.float64)
    T = x.size
    if num_scales < 1:
        raise ShapeMismatchError("num_scales >= 1 required")
    w0 = 6.0
    s0 = 2.0 * (w0 + np.sqrt(2.0 + w0 * w0)) / (4.0 * np.pi)  # Fourier period 2
    max_scale = max(s0, T / morlet_fourier_period(1.0, w0) / 2.0)
    if num_scales == 1:
        scales = np.array([s0])
    else:
        scales = s0 * (max_scale / s0) ** (np.arange(num_scales) / (num_scales - 1))
    # frequency-domain CWT: conv with the wavelet = product of spectra
    xf = np.fft.fft(x)
    omega = 2.0 * np.pi * np.fft.fftfreq(T)
    out = np.empty((num_scales, T))
    for j, s in enumerate(scales):
        # L2-normalized Morlet daughter in the frequency domain
        psi_hat = (np.pi ** -0.25) * np.sqrt(2 * np.pi * s) * \
            np.exp(-0.5 * (s * omega - w0) ** 2) * (omega > 0)
        out[j] = np.abs(np.fft.ifft(xf * np.conj(psi_hat)))
    return GrayImage(out, meta={"scales": scales, "w0": w0})


def _triangular_filterbank(n_filters: int, n_bins: int) -> np.ndarray:
    """Triangular filters evenly spaced over the linear frequency bins."""
    points = np.linspace(0, n_bins - 1, n_filters + 2)
    fb = np.zeros((n_filters, n_bins))
    bins = np.arange(n_bins, dtype=np.float64)
    for m in range(n_filters):
        left, center, right = points[m], points[m + 1], points[m + 2]
        up = (bins - left) / max(center - left, 1e-12)
        down = (right - bins) / max(right - center, 1e-12)
        fb[m] = np.clip(np.minimum(up, down), 0.0, None)
    return fb


def filterbank_spectrogram(x: np.ndarray, window_len: int | None = None,
                           hop: int | None = None, n_filters: int = 32) -> GrayImage:
    """Triangular filterbank energies over the STFT magnitudes,
    log-compressed; rows are filters."""
    x = np.asarray(x, dtype=np.float64)
    T = x.size
    if window_len is None:
        window_len = min(64, T)
    if hop is None:
        hop = max(1, window_len // 2)
    if n_filters < 1:
        raise ShapeMismatchError("n_filters >= 1 required")
    if window_len > T:
        raise WindowTooLongError(f"window {window_len} > series length {T}")
    mag = _stft_magnitude(x, window_len, hop)
    fb = _triangular_filterbank(n_filters, mag.shape[0])
    return GrayImage(np.log1p(fb @ mag))


def lineplot_raster(x: np.ndarray, height: int = 64, width: int = 64,
                    line_thickness: int = 1) -> GrayImage:
    """Binary raster of the series line plot (top row = max value).

    Consecutive points are joined with Bresenham segments; a constant
    series draws a horizontal midline.
    """
    x = np.asarray(x, dtype=np.float64)
    if height < 2 or width < 2:
        raise ShapeMismatchError("height, width >= 2 required")
    T = x.size
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        rows = np.full(T, (height - 1) // 2)
    else:
        frac = (x - lo) / (hi - lo)
        rows = np.rint((1.0 - frac) * (height - 1)).astype(int)
    if T == 1:
        cols = np.array([0])
    else:
        cols = np.rint(np.arange(T) * (width - 1) / (T - 1)).astype(int)
    img = np.zeros((height, width))

    def draw(r0, c0, r1, c1):
        dr, dc = abs(r1 - r0), abs(c1 - c0)
        sr = 1 if r0 < r1 else -1
        sc = 1 if c0 < c1 else -1
        err = dc - dr
        r, c = r0, c0
        while True:
            img[r, c] = 1.0
            if r == r1 and c == c1:
                break
            e2 = 2 * err
            if e2 > -dr:
                err -= dr
                c += sc
            if e2 < dc:
                err += dc
                r += sr

    img[rows[0], cols[0]] = 1.0
    for i in range(T - 1):
        draw(rows[i], cols[i], rows[i + 1], cols[i + 1])
    if line_thickness > 1:
        thick = img.copy()
        for k in range(1, line_thickness):
            thick[k:, :] = np.maximum(thick[k:, :], img[:-k, :])
            thick[:-k, :] = np.maximum(thick[:-k, :], img[k:, :])
        img = thick
    return img_from(img)


def img_from(pixels: np.ndarray) -> GrayImage:
    return GrayImage(pixels)


# canonical method names used by the CLI and routing checks
IMAGING_METHODS = ("lineplot", "mvh", "uvh", "stft", "wavelet", "filterbank",
                   "gaf", "rp")
VALUE_PRESERVING_METHODS = ("uvh", "mvh")
