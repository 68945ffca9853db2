"""Spectral estimation, the analytic smoothed-OFDM PSD, BER and complexity counts."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb

import numpy as np

from .ofdm import SystemParams, qam_map
from .smoother import SmootherContext, _pulse_phase, build_smoother, stream_coeffs

DB_FLOOR = -300.0


@dataclass(frozen=True)
class PsdEstimate:
    freqs: np.ndarray
    power: np.ndarray
    normalization: str = "absolute"      # or "peak-0dB"
    seg_len: int | None = None
    window: str | None = None
    overlap: int | None = None

    def __post_init__(self):
        if np.any(np.diff(self.freqs) <= 0):
            raise ValueError("frequency grid must be strictly increasing")

    @property
    def db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            out = 10 * np.log10(self.power)
        return np.where(self.power > 0, out, DB_FLOOR)

    def peak_normalized(self) -> "PsdEstimate":
        peak = np.max(self.power)
        power = self.power / peak if peak > 0 else self.power.copy()
        return replace(self, power=power, normalization="peak-0dB")

    def at(self, f: float) -> float:
        """Power at the grid point nearest to ``f``."""
        return float(self.power[np.argmin(np.abs(self.freqs - f))])


def hann(n: int) -> np.ndarray:
    """Periodic Hann window."""
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


def welch_psd(signal, seg_len: int = 2048, overlap: int = 512, window: str = "hanning",
              fs: float = 1.0, normalize: bool = True) -> PsdEstimate:
    """Averaged modified periodogram on a two-sided, DC-centred grid.

    Each segment's periodogram is divided by sum(w**2), so white noise of
    variance s2 has a flat level s2 in ``absolute`` normalization.
    """
    x = np.asarray(signal, dtype=complex).ravel()
    if x.size < seg_len:
        raise ValueError(f"signal of {x.size} samples shorter than one segment ({seg_len})")
    if not 0 <= overlap < seg_len:
        raise ValueError("overlap must be in [0, seg_len)")
    if window not in ("hanning", "hann"):
        raise ValueError(f"unsupported window {window!r}")
    w = hann(seg_len)
    hop = seg_len - overlap
    starts = np.arange(0, x.size - seg_len + 1, hop)
    acc = np.zeros(seg_len)
    # chunked to bound memory on long streams
    for chunk in np.array_split(starts, max(1, starts.size // 256)):
        segs = x[chunk[:, None] + np.arange(seg_len)] * w
        acc += np.sum(np.abs(np.fft.fft(segs, axis=1)) ** 2, axis=0)
    power = np.fft.fftshift(acc / (starts.size * np.sum(w**2)))
    freqs = np.fft.fftshift(np.fft.fftfreq(seg_len, d=1.0 / fs))
    est = PsdEstimate(freqs, power, "absolute", seg_len, "hanning", overlap)
    return est.peak_normalized() if normalize else est


# ---------------------------------------------------------------- analytic PSD

_SING_EPS = 1e-9      # in units of delta_f
_SING_OFFSET = 1e-6


@dataclass(frozen=True)
class AnalyticPsdParams:
    """Inputs for the Monte Carlo evaluation of the smoothed-OFDM spectrum.

    ``draws`` independent blocks of ``block`` consecutive symbols each are
    averaged; ``freqs`` is the evaluation grid in Hz.
    """

    params: SystemParams
    freqs: np.ndarray
    window: str = "blackman"
    draws: int = 64
    block: int = 64
    qam_order: int = 16
    anchor: str = "start"
    ctx: SmootherContext | None = field(default=None, compare=False)

    @property
    def T_p(self) -> float:
        return (self.params.L - 1) * self.params.T_samp

    @property
    def rho(self) -> float:
        return 1.0 / (2 * self.T_p)

    @property
    def mu(self) -> float:
        return self.T_p / self.params.T_s


def _sinc_ratio(x, half_width):
    """sin(x * half_width) / x, with the x -> 0 limit."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, half_width, np.sin(safe * half_width) / safe)


def _window_spectrum_raw(nbar: int, f_r, p: SystemParams, coeffs, T_p: float):
    f_r = np.asarray(f_r, dtype=float)
    Ts = p.T_s
    nu = 2 * np.pi * f_r / Ts
    half = T_p / 2
    centre = -p.T_cp + half
    out = np.zeros(f_r.shape, dtype=complex)
    if nbar == 0:
        out += coeffs[0] * 2 * _sinc_ratio(nu, half)
    for c in (1, 2):
        a = coeffs[c]
        if a == 0:
            continue
        omega = c * np.pi / T_p
        alpha = 3 * c * np.pi / 2 + nbar * np.pi / 2
        with np.errstate(divide="ignore", invalid="ignore"):
            term = (np.exp(1j * alpha) * np.sin((nu + omega) * half) / (nu + omega)
                    + np.exp(-1j * alpha) * np.sin((nu - omega) * half) / (nu - omega))
        out += a * omega**nbar * term
    return np.exp(1j * nu * centre) * out


def window_spectrum(nbar: int, f_r, p: SystemParams, window: str = "blackman"):
    """Fourier integral of e^{j2pi k t/T_s} g^(nbar)(t) over the smoothing support.

    ``f_r = k - f T_s``; derivatives of g are in time units. The removable
    singularities at f_r = +-rho T_s and +-2 rho T_s are handled by averaging
    the formula at +-1e-6 offsets; f_r = 0 uses the exact limit.
    """
    from .smoother import WindowSpec

    coeffs = WindowSpec(window, p.L, p.T_samp).cosine_coeffs
    T_p = (p.L - 1) * p.T_samp
    f_r = np.atleast_1d(np.asarray(f_r, dtype=float))
    val = _window_spectrum_raw(nbar, f_r, p, coeffs, T_p)
    rho_ts = p.T_s / (2 * T_p)
    near = np.zeros(f_r.shape, dtype=bool)
    for c in (1, 2):
        if coeffs[c] != 0:
            near |= np.abs(np.abs(f_r) - c * rho_ts) < _SING_EPS
    if np.any(near):
        fr = f_r[near]
        val[near] = 0.5 * (_window_spectrum_raw(nbar, fr + _SING_OFFSET, p, coeffs, T_p)
                           + _window_spectrum_raw(nbar, fr - _SING_OFFSET, p, coeffs, T_p))
    return val


def _kernels(ap: AnalyticPsdParams, order: int):
    """Per-subcarrier data kernel (K, F) and per-coefficient smoother kernel (N+1, F)."""
    p = ap.params
    f = np.asarray(ap.freqs, dtype=float)
    k = p.k
    Ts, beta = p.T_s, p.beta
    f_r = k[:, None] - f[None, :] * Ts
    base = (Ts * (1 + beta) / p.M) * np.sinc(f_r * (1 + beta)) * np.exp(1j * np.pi * f_r * (1 - beta))
    data = base * (k[:, None] / (f[None, :] * Ts)) ** order if order else base

    # symbol-local time basis: f^(n)(l) = (1/M)(j2pi/M)^n sum_k k^n c_k e^{j2pi k t/T_s}
    c = _pulse_phase(p, ap.anchor) * np.exp(-1j * p.phi * k)
    G = [window_spectrum(nb, f_r.ravel(), p, ap.window).reshape(f_r.shape) for nb in range(order + 1)]
    smooth = np.zeros((p.N + 1, f.size), dtype=complex)
    inv = (2j * np.pi * f) ** (-order) if order else 1.0
    for n in range(p.N + 1):
        acc = np.zeros(f.size, dtype=complex)
        for nb in range(order + 1):
            w = comb(order, nb) * (2j * np.pi / Ts) ** (order - nb)
            acc += w * ((k ** (n + order - nb) * c) @ G[nb])
        smooth[n] = (1.0 / p.M) * (2j * np.pi / p.M) ** n * acc * inv
    return data, smooth


def block_spectrum(xs, bs, ap: AnalyticPsdParams, order: int | None = None, kernels=None):
    """Fourier transform of one smoothed block on ``ap.freqs``.

    ``order`` selects the derivative form (default N). Every order up to N
    gives the same transform when the block is (order-1)-times continuously
    differentiable; order 0 is the plain transform.
    """
    p = ap.params
    order = p.N if order is None else order
    data, smooth = kernels if kernels is not None else _kernels(ap, order)
    xs = np.asarray(xs, dtype=complex)
    bs = np.asarray(bs, dtype=complex)
    f = np.asarray(ap.freqs, dtype=float)
    shifts = np.exp(-2j * np.pi * np.outer(np.arange(bs.shape[0]), f) * p.T)
    per_symbol = bs @ smooth
    per_symbol[: xs.shape[0]] += xs @ data
    return np.sum(shifts * per_symbol, axis=0)


def _draw_symbols(ap: AnalyticPsdParams, seed: int, d: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xA5, d)))
    bps = int(np.log2(ap.qam_order))
    bits = rng.integers(0, 2, ap.block * ap.params.K * bps)
    return qam_map(bits, ap.qam_order, ap.params.K)


def analytic_draw_powers(ap: AnalyticPsdParams, seed: int, draw_ids) -> np.ndarray:
    """|block spectrum|^2 for each requested draw, stacked (len(draw_ids), F)."""
    p = ap.params
    ctx = ap.ctx or build_smoother(p, anchor=ap.anchor)
    kern = _kernels(ap, p.N)
    out = np.empty((len(draw_ids), len(ap.freqs)))
    for row, d in enumerate(draw_ids):
        xs = _draw_symbols(ap, seed, d)
        bs = stream_coeffs(xs, ctx)
        out[row] = np.abs(block_spectrum(xs, bs, ap, kernels=kern)) ** 2
    return out


def analytic_psd(ap: AnalyticPsdParams, seed: int = 0, normalize: bool = True,
                 draw_powers: np.ndarray | None = None) -> PsdEstimate:
    """Monte Carlo evaluation of the smoothed-stream spectrum.

    Each draw is an independent block whose first junction meets a silent
    symbol and which is closed by the trailing smoothing symbol, so the block
    is N-continuous end to end and the derivative form is exact.
    """
    p = ap.params
    f = np.asarray(ap.freqs, dtype=float)
    if p.N >= 1 and np.any(f == 0):
        raise ValueError("frequency grid must exclude f = 0 when N >= 1")
    if ap.window not in ("blackman", "hanning"):
        raise ValueError("analytic PSD needs a cosine-series window (blackman or hanning)")
    if p.N > 2:
        # g'' is nonzero at the window tail, so w is only C^1 there
        raise ValueError("analytic PSD form is exact only for N <= 2 with a cosine-series window")
    if draw_powers is None:
        draw_powers = analytic_draw_powers(ap, seed, range(ap.draws))
    power = np.mean(draw_powers, axis=0) / ((ap.block + 1) * p.T)
    est = PsdEstimate(f, power, "absolute", None, ap.window, None)
    return est.peak_normalized() if normalize else est


def fine_grid(fs: float, seg_len: int = 2048, oversample: int = 8) -> np.ndarray:
    """Frequency grid ``oversample`` times denser than a Welch grid, offset by half a step.

    The half-step offset keeps f = 0 off the grid.
    """
    n = seg_len * oversample
    return (np.arange(n) - n // 2 + 0.5) * fs / n


def welch_view(fine: PsdEstimate, fs: float, seg_len: int = 2048, oversample: int = 8,
               normalize: bool = True) -> PsdEstimate:
    """Expected reading of a Hann-window Welch estimator for a PSD sampled on ``fine_grid``.

    Computes sum_j P(f_j) |W(f - f_j)|^2 at each Welch bin, with W the
    DTFT of the segment window (periodic extension over one sample-rate span).
    """
    n = seg_len * oversample
    if fine.freqs.size != n:
        raise ValueError("PSD must be sampled on fine_grid(fs, seg_len, oversample)")
    w = hann(seg_len)
    # Welch bins sit half a fine step from the fine grid: W((q - 1/2) df)
    kern = np.abs(np.fft.fft(w * np.exp(1j * np.pi * np.arange(seg_len) / n), n)) ** 2
    conv = np.fft.ifft(np.fft.fft(fine.power) * np.fft.fft(kern)).real
    power = np.maximum(conv[::oversample], 0.0) / np.sum(w**2)
    freqs = (np.arange(seg_len) - seg_len // 2) * fs / seg_len
    est = PsdEstimate(freqs, power, "absolute", seg_len, "hanning", None)
    return est.peak_normalized() if normalize else est


def out_of_band_mask(freqs, p: SystemParams, width: float) -> np.ndarray:
    """Grid points within ``width`` Hz beyond either edge of the occupied band."""
    hi = (p.k.max() + 0.5) * p.delta_f
    lo = (p.k.min() - 0.5) * p.delta_f
    f = np.asarray(freqs)
    return ((f > hi) & (f <= hi + width)) | ((f < lo) & (f >= lo - width))


# ---------------------------------------------------------------- fitting, BER, complexity

def slope_fit(psd: PsdEstimate, band, ref: float = 0.0) -> float:
    """Least-squares exponent alpha of power ~ (f - ref)**alpha over ``band`` (Hz)."""
    lo, hi = band
    sel = (psd.freqs >= lo) & (psd.freqs <= hi) & (psd.power > 0)
    if lo <= ref:
        raise ValueError("band must lie strictly above the reference frequency")
    if np.count_nonzero(sel) < 10:
        raise ValueError(f"need at least 10 grid points in band, got {np.count_nonzero(sel)}")
    x = np.log10(psd.freqs[sel] - ref)
    y = np.log10(psd.power[sel])
    return float(np.polyfit(x, y, 1)[0])


def ber(tx_bits, rx_bits) -> float:
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.size != rx.size:
        raise ValueError(f"length mismatch: {tx.size} vs {rx.size}")
    if tx.size == 0:
        raise ValueError("empty bit streams")
    return float(np.count_nonzero(tx != rx)) / tx.size


SCHEMES = ("nc_ofdm", "ncsp_ofdm", "low_interference")


@dataclass(frozen=True)
class ComplexityReport:
    scheme: str
    real_mults: int
    real_adds: int

    @property
    def total(self) -> int:
        return self.real_mults + self.real_adds


def complexity_counts(scheme: str, K: int, N: int, L: int) -> ComplexityReport:
    """Transmitter real-operation counts with the O() dropped."""
    if scheme == "nc_ofdm":
        mults, adds = 4 * (N + 1) * K, 2 * (N + 1) * (2 * K - 1)
    elif scheme == "ncsp_ofdm":
        mults, adds = 8 * (N + 1) * K, 8 * (N + 1) * K - 4 * (N + 1)
    elif scheme == "low_interference":
        mults, adds = 2 * N * K + (N + 1) * L, (N + 1) * (2 * K + L + N - 2)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    return ComplexityReport(scheme, mults, adds)
