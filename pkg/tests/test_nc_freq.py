import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncofdm.nc_freq import build_precoder, precode_stream
from ncofdm.ofdm import SystemParams, modulate
from ncofdm.smoother import derivative_matrix
from conftest import random_qam


def test_one_subcarrier_full_projector():
    p = SystemParams(K=1, M=8, M_cp=2, N=0, L=2, subcarrier_indices=(0,))
    ctx = build_precoder(p)
    np.testing.assert_allclose(ctx.A, [[1.0]])
    np.testing.assert_allclose(ctx.P, [[1.0]], atol=1e-15)


def test_too_few_subcarriers():
    p = SystemParams(K=2, M=16, M_cp=4, N=2, L=4)
    with pytest.raises(ValueError):
        build_precoder(p)


def test_zero_power_defined_as_one():
    ctx = build_precoder(SystemParams(K=16, M=128, M_cp=16, N=2, L=16))
    assert np.all(ctx.A[0] == 1.0)


@pytest.mark.parametrize("N", [0, 1, 2, 3])
def test_projector_properties(N):
    p = SystemParams(K=16, M=128, M_cp=9, N=N, L=8)
    P = build_precoder(p).P
    assert np.trace(P).real == pytest.approx(N + 1, abs=1e-8)
    assert np.max(np.abs(P @ P - P)) <= 1e-9
    np.testing.assert_allclose(P, P.conj().T, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 64), st.integers(0, 4), st.booleans())
def test_projector_properties_random_geometry(K, N, exclude_dc):
    if K < N + 1:
        return
    p = SystemParams(K=K, M=8 * K + 8, M_cp=K, N=N, L=1, exclude_dc=exclude_dc)
    P = build_precoder(p).P
    assert np.trace(P).real == pytest.approx(N + 1, abs=1e-8)
    assert np.max(np.abs(P @ P - P)) <= 1e-9


def test_first_symbol_untouched_and_zero_stream(rng):
    p = SystemParams(K=16, M=128, M_cp=16, N=2, L=16)
    ctx = build_precoder(p)
    xs = random_qam(rng, 4, p.K)
    out = precode_stream(xs, ctx)
    np.testing.assert_array_equal(out[0], xs[0])
    assert np.all(precode_stream(np.zeros((5, p.K)), ctx) == 0)


def test_empty_stream_rejected():
    ctx = build_precoder(SystemParams(K=16, M=128, M_cp=16, N=1, L=16))
    with pytest.raises(ValueError):
        precode_stream(np.zeros((0, 16)), ctx)


def test_junction_continuity_n1(rng):
    p = SystemParams(K=16, M=128, M_cp=16, N=1, L=16)
    ctx = build_precoder(p)
    xs = random_qam(rng, 2, p.K)
    xb = precode_stream(xs, ctx)
    ys = modulate(xb, p)
    # spectral derivatives of each core, evaluated at the junction positions
    kk = np.fft.fftfreq(p.M, 1 / p.M)
    for n in range(p.N + 1):
        c_prev = np.fft.fft(ys[0, p.M_cp:]) / p.M
        c_cur = np.fft.fft(ys[1, p.M_cp:]) / p.M
        left = np.sum(c_prev * (2j * np.pi * kk / p.M) ** n * np.exp(2j * np.pi * kk * p.M / p.M))
        right = np.sum(c_cur * (2j * np.pi * kk / p.M) ** n * np.exp(-2j * np.pi * kk * p.M_cp / p.M))
        assert abs(left - right) <= 1e-8 * max(abs(left), abs(right))


def test_matches_derivative_matrix_view(rng):
    p = SystemParams(N=3)
    ctx = build_precoder(p)
    xb = precode_stream(random_qam(rng, 6, p.K), ctx)
    D = derivative_matrix(p)
    left = xb[:-1] @ D.T
    right = (xb[1:] * ctx.Phi) @ D.T
    assert np.max(np.abs(left - right) / np.abs(left)) <= 1e-8


def test_distortion_is_nonzero(rng):
    p = SystemParams(K=16, M=128, M_cp=16, N=2, L=16)
    xs = random_qam(rng, 10, p.K)
    xb = precode_stream(xs, build_precoder(p))
    assert np.all(np.sum(np.abs(xb[1:] - xs[1:]) ** 2, axis=1) > 0)
