import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import signal as sps
from scipy.integrate import quad

from ncofdm.analysis import (
    AnalyticPsdParams, PsdEstimate, analytic_psd, ber, block_spectrum, complexity_counts,
    fine_grid, hann, out_of_band_mask, slope_fit, welch_psd, welch_view, window_spectrum,
)
from ncofdm.ofdm import SystemParams
from ncofdm.smoother import build_smoother, smooth_signal_derivative, stream_coeffs
from conftest import random_qam


# ---------------------------------------------------------------- Welch

def test_welch_tone_peak():
    n = 2048 * 8
    x = np.exp(2j * np.pi * 100 * np.arange(n) / 2048)
    est = welch_psd(x, normalize=False)
    peak = np.argmax(est.power)
    assert est.freqs[peak] == pytest.approx(100 / 2048)
    assert est.db[peak] - np.median(est.db) >= 40


def test_welch_white_noise_flat_and_calibrated():
    rng = np.random.default_rng(5)
    x = (rng.standard_normal(1_000_000) + 1j * rng.standard_normal(1_000_000)) / np.sqrt(2)
    est = welch_psd(x, normalize=False)
    assert np.all(np.abs(est.db) <= 1.0)
    assert abs(np.mean(est.power) - 1.0) < 0.02


def test_welch_matches_scipy(rng):
    x = rng.standard_normal(9000) + 1j * rng.standard_normal(9000)
    mine = welch_psd(x, seg_len=512, overlap=128, normalize=False, fs=2.0)
    f, ref = sps.welch(x, fs=2.0, window="hann", nperseg=512, noverlap=128, detrend=False,
                       return_onesided=False, scaling="density")
    np.testing.assert_allclose(mine.power, np.fft.fftshift(ref) * 2.0, rtol=1e-10)
    np.testing.assert_allclose(mine.freqs, np.fft.fftshift(f))


def test_welch_zero_signal_and_short_input():
    est = welch_psd(np.zeros(4096))
    assert np.all(est.power == 0)
    assert np.all(est.db == -300.0)
    with pytest.raises(ValueError, match="shorter than one segment"):
        welch_psd(np.ones(100))


def test_peak_normalization():
    est = PsdEstimate(np.array([-1.0, 0.0, 1.0]), np.array([1.0, 4.0, 2.0])).peak_normalized()
    assert est.normalization == "peak-0dB"
    np.testing.assert_allclose(est.power, [0.25, 1.0, 0.5])
    with pytest.raises(ValueError, match="increasing"):
        PsdEstimate(np.array([0.0, 0.0]), np.array([1.0, 1.0]))


def test_hann_is_periodic():
    np.testing.assert_allclose(hann(8), sps.get_window("hann", 8))


def test_welch_view_reproduces_welch_for_tone_grid():
    # a PSD made of fine-grid lines is read by Welch like the matching tones
    fs, seg, ov = 1.0, 256, 8
    grid = fine_grid(fs, seg, ov)
    power = np.zeros(grid.size)
    power[grid.size // 2 + 3] = 1.0
    view = welch_view(PsdEstimate(grid, power), fs, seg, ov, normalize=False)
    tone = np.exp(2j * np.pi * grid[grid.size // 2 + 3] * np.arange(seg * 64))
    direct = welch_psd(tone, seg, 0, fs=fs, normalize=False)
    np.testing.assert_allclose(view.power, direct.power, rtol=1e-6, atol=1e-12 * direct.power.max())


# ---------------------------------------------------------------- window spectrum

def _quad_window_spectrum(nbar, fr, p):
    Ts, Tcp = p.T_s, p.T_cp
    Tp = (p.L - 1) * p.T_samp
    r = np.pi / Tp

    def g(t):
        th = np.pi + r * (t + Tcp)
        out = sum(a * (c * r) ** nbar * np.cos(c * th + nbar * np.pi / 2) for a, c in ((-0.5, 1), (0.08, 2)))
        return out + (0.42 if nbar == 0 else 0.0)

    f = lambda t: np.exp(2j * np.pi * fr * t / Ts) * g(t)
    re = quad(lambda t: f(t).real, -Tcp, -Tcp + Tp, limit=400)[0]
    im = quad(lambda t: f(t).imag, -Tcp, -Tcp + Tp, limit=400)[0]
    return re + 1j * im


def _closed_form_reference(nbar, fr, p):
    # the printed cosine-series form of the same integral
    Ts, Tcp = p.T_s, p.T_cp
    Tp = (p.L - 1) * p.T_samp
    rho, mu = 1 / (2 * Tp), Tp / Ts
    x = np.pi * fr / Ts
    c, s = np.cos(np.pi * nbar / 2), np.sin(np.pi * nbar / 2)
    a = (0.42 if nbar == 0 else 0.0) * np.sin(np.pi * mu * fr) / x
    b = (0.5 * (2 * np.pi * rho) ** nbar * np.cos(np.pi * mu * fr) / (1 - (rho * Ts / fr) ** 2)
         * (c / (1j * x) - np.pi * rho * s / x**2))
    d = (0.08 * (4 * np.pi * rho) ** nbar * np.sin(np.pi * mu * fr) / (1 - (2 * rho * Ts / fr) ** 2)
         * (c / x - 2j * np.pi * rho * s / x**2))
    return np.exp(1j * np.pi * fr * (Tp - 2 * Tcp) / Ts) * (a - b + d)


@pytest.mark.parametrize("nbar", [0, 1, 2, 3])
@pytest.mark.parametrize("fr", [0.37, -3.3, 17.2, -120.5])
def test_window_spectrum_oracles(nbar, fr):
    p = SystemParams()
    got = window_spectrum(nbar, fr, p)[0]
    assert got == pytest.approx(_quad_window_spectrum(nbar, fr, p), rel=1e-9)
    assert got == pytest.approx(_closed_form_reference(nbar, fr, p), rel=1e-9)


@pytest.mark.parametrize("nbar", [0, 1, 2])
@pytest.mark.parametrize("mult", [1, -1, 2, -2])
def test_window_spectrum_removable_singularities(nbar, mult):
    p = SystemParams()
    rho_ts = p.T_s / (2 * (p.L - 1) * p.T_samp)
    fr = mult * rho_ts
    got = window_spectrum(nbar, fr, p)[0]
    assert np.isfinite(got)
    assert got == pytest.approx(_quad_window_spectrum(nbar, fr, p), rel=1e-6)
    both = 0.5 * (_closed_form_reference(nbar, fr + 1e-6, p) + _closed_form_reference(nbar, fr - 1e-6, p))
    assert got == pytest.approx(both, rel=1e-6)


def test_window_spectrum_dc_limit():
    p = SystemParams()
    Tp = (p.L - 1) * p.T_samp
    # only the constant term survives at f_r = 0: 0.42 * mu * T_s
    assert window_spectrum(0, 0.0, p)[0] == pytest.approx(0.42 * Tp, rel=1e-12)


# ---------------------------------------------------------------- block spectrum

def _numeric_ft(xs, bs, ctx, freqs, sub=64):
    """Midpoint-rule Fourier transform of the continuous smoothed waveform."""
    p = ctx.params
    n = p.symbol_len * sub
    ell = (np.arange(n) + 0.5) / sub                 # sample offsets from the symbol start
    t_local = ell * p.T_samp - p.T_cp
    dt = p.T_samp / sub
    out = np.zeros(freqs.size, dtype=complex)
    for i in range(bs.shape[0]):
        y = np.zeros(n, dtype=complex)
        if i < xs.shape[0]:
            y += np.exp(2j * np.pi * np.outer(ell - p.M_cp, p.k) / p.M) @ xs[i] / p.M
        inside = ell <= p.L - 1
        y[inside] += smooth_signal_derivative(bs[i], 0, ctx, ell[inside])
        t = t_local + i * p.T
        out += np.exp(-2j * np.pi * np.outer(freqs, t)) @ y * dt
    return out


def test_block_spectrum_matches_numeric_transform(small_params, rng):
    p = small_params
    ctx = build_smoother(p)
    xs = random_qam(rng, 3, p.K)
    bs = stream_coeffs(xs, ctx)
    freqs = np.array([-7.3, 2.1, 9.5, 12.25, 30.0, -45.5]) * p.delta_f
    ap = AnalyticPsdParams(p, freqs)
    ref = _numeric_ft(xs, bs, ctx, freqs)
    got = block_spectrum(xs, bs, ap, order=0)
    np.testing.assert_allclose(got, ref, rtol=1e-4, atol=1e-4 * np.max(np.abs(ref)))


@pytest.mark.parametrize("order", [1, 2])
def test_derivative_form_equals_plain_transform(small_params, rng, order):
    p = small_params
    ctx = build_smoother(p)
    xs = random_qam(rng, 4, p.K)
    bs = stream_coeffs(xs, ctx)
    freqs = (np.arange(-200, 200) + 0.5) * p.delta_f / 3
    ap = AnalyticPsdParams(p, freqs)
    plain = block_spectrum(xs, bs, ap, order=0)
    deriv = block_spectrum(xs, bs, ap, order=order)
    np.testing.assert_allclose(deriv, plain, rtol=1e-9, atol=1e-9 * np.max(np.abs(plain)))


def test_zero_coefficients_give_sinc_shape():
    p = SystemParams(K=1, M=64, M_cp=8, N=0, L=8, subcarrier_indices=(0,))
    freqs = np.linspace(-5, 5, 101)[1::2] * p.delta_f * 0.999
    ap = AnalyticPsdParams(p, freqs)
    xs = np.ones((1, 1), dtype=complex)
    got = np.abs(block_spectrum(xs, np.zeros((2, 1)), ap, order=0)) ** 2
    expected = (p.T / p.M * np.sinc(freqs * p.T)) ** 2
    np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-12 * expected.max())


def test_analytic_psd_rejects_dc_and_unsupported_orders():
    p = SystemParams(K=16, M=128, M_cp=36, N=1, L=36)
    with pytest.raises(ValueError, match="f = 0"):
        analytic_psd(AnalyticPsdParams(p, np.array([-1.0, 0.0, 1.0]), draws=1, block=1))
    p3 = SystemParams(K=16, M=128, M_cp=36, N=3, L=36)
    with pytest.raises(ValueError, match="N <= 2"):
        analytic_psd(AnalyticPsdParams(p3, np.array([1.0, 2.0]), draws=1, block=1))
    with pytest.raises(ValueError, match="cosine"):
        analytic_psd(AnalyticPsdParams(p, np.array([1.0, 2.0]), window="triangular", draws=1, block=1))


def test_analytic_psd_is_seeded(small_params):
    p = small_params
    freqs = fine_grid(p.sample_rate, 64, 2)
    ap = AnalyticPsdParams(p, freqs, draws=3, block=4)
    a = analytic_psd(ap, seed=9)
    b = analytic_psd(ap, seed=9)
    np.testing.assert_array_equal(a.power, b.power)
    assert a.power.max() == pytest.approx(1.0)
    assert not np.array_equal(a.power, analytic_psd(ap, seed=10).power)


def test_out_of_band_mask():
    p = SystemParams()
    hi, lo = 127.5 * 15e3, -128.5 * 15e3
    f = np.array([0.0, hi - 1, hi + 1, hi + 1e6, hi + 1e6 + 1, lo + 1, lo - 1, lo - 1e6, lo - 1e6 - 1])
    np.testing.assert_array_equal(out_of_band_mask(f, p, 1e6), [0, 0, 1, 1, 0, 0, 1, 1, 0])


# ---------------------------------------------------------------- slope fit

def test_slope_fit_synthetic():
    f = np.linspace(1.0, 50.0, 200)
    assert slope_fit(PsdEstimate(f, f**-4.0), (2.0, 40.0)) == pytest.approx(-4, abs=0.1)
    assert slope_fit(PsdEstimate(f, np.ones_like(f)), (2.0, 40.0)) == pytest.approx(0, abs=0.05)
    shifted = PsdEstimate(f, (f - 0.5) ** -2.0)
    assert slope_fit(shifted, (2.0, 40.0), ref=0.5) == pytest.approx(-2, abs=1e-9)


def test_slope_fit_needs_points():
    f = np.linspace(1.0, 50.0, 50)
    with pytest.raises(ValueError, match="at least 10"):
        slope_fit(PsdEstimate(f, f**-2.0), (10.0, 15.0))
    with pytest.raises(ValueError, match="reference"):
        slope_fit(PsdEstimate(f, f**-2.0), (0.0, 40.0), ref=1.0)


# ---------------------------------------------------------------- BER

def test_ber_examples(rng):
    bits = rng.integers(0, 2, 1000)
    assert ber(bits, bits) == 0.0
    assert ber(bits, 1 - bits) == 1.0
    flipped = bits.copy()
    flipped[[3, 500, 999]] ^= 1
    assert ber(bits, flipped) == pytest.approx(0.003)
    with pytest.raises(ValueError, match="length mismatch"):
        ber(bits, bits[:-1])
    with pytest.raises(ValueError):
        ber([], [])


# ---------------------------------------------------------------- complexity

def test_complexity_examples():
    assert complexity_counts("nc_ofdm", 256, 2, 144).real_mults == 3072
    li = complexity_counts("low_interference", 256, 2, 144)
    assert li.real_mults == 1456
    assert round(100 * li.real_mults / 3072, 1) == 47.4
    tiny = complexity_counts("low_interference", 1, 0, 1)
    assert (tiny.real_mults, tiny.real_adds) == (1, 1)
    assert complexity_counts("nc_ofdm", 256, 0, 144).real_mults == 4 * 256
    with pytest.raises(ValueError, match="unknown scheme"):
        complexity_counts("ofdm", 1, 0, 1)


def _hand_counts(scheme, K, N, L):
    # spreadsheet-style recomputation, term by term
    table = {
        "nc_ofdm": (4 * (N + 1) * K, 2 * (N + 1) * (2 * K - 1)),
        "ncsp_ofdm": (8 * (N + 1) * K, 8 * (N + 1) * K - 4 * (N + 1)),
        "low_interference": (2 * N * K + (N + 1) * L, (N + 1) * (2 * K + L + N - 2)),
    }
    return table[scheme]


@settings(max_examples=200)
@given(st.sampled_from(["nc_ofdm", "ncsp_ofdm", "low_interference"]),
       st.integers(1, 4096), st.integers(0, 8), st.integers(1, 512))
def test_complexity_matches_hand_and_is_monotone(scheme, K, N, L):
    r = complexity_counts(scheme, K, N, L)
    assert (r.real_mults, r.real_adds) == _hand_counts(scheme, K, N, L)
    assert r.total == r.real_mults + r.real_adds
    for bumped in (complexity_counts(scheme, K + 1, N, L), complexity_counts(scheme, K, N + 1, L),
                   complexity_counts(scheme, K, N, L + 1)):
        assert bumped.real_mults >= r.real_mults and bumped.real_adds >= r.real_adds
