import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ncofdm.numerics import SingularMatrixError, dft, hermitian_solve, idft, matmul, naive_dft

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def complex_vectors(n):
    return st.builds(lambda re, im: re + 1j * im,
                     arrays(float, n, elements=finite), arrays(float, n, elements=finite))


def test_idft_impulse_at_dc_is_constant():
    np.testing.assert_allclose(idft(np.eye(8)[0]), np.full(8, 1 / 8))


def test_idft_single_tone():
    m = np.arange(8)
    np.testing.assert_allclose(idft(np.eye(8)[3]), np.exp(2j * np.pi * 3 * m / 8) / 8, atol=1e-15)


def test_dft_of_constant_and_zero():
    np.testing.assert_allclose(dft(np.full(8, 1 / 8)), np.eye(8)[0], atol=1e-15)
    assert np.all(dft(np.zeros(8)) == 0)


def test_zero_length_rejected():
    with pytest.raises(ValueError):
        dft([])
    with pytest.raises(ValueError):
        idft(np.zeros(0))


@pytest.mark.parametrize("M", [8, 16, 64, 2048])
def test_round_trip(M, rng):
    x = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    np.testing.assert_allclose(dft(idft(x)), x, rtol=0, atol=1e-12 * np.max(np.abs(x)))


@pytest.mark.parametrize("M", [5, 16, 64])
def test_fast_matches_naive(M, rng):
    x = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    np.testing.assert_allclose(dft(x), naive_dft(x), atol=1e-10)
    np.testing.assert_allclose(idft(x), naive_dft(x, inverse=True), atol=1e-10)


@given(complex_vectors(64))
def test_parseval(x):
    lhs = np.sum(np.abs(idft(x)) ** 2)
    rhs = np.sum(np.abs(x) ** 2) / x.size
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


def test_solve_trivial_cases():
    v = np.array([1 + 2j, -3, 0.5j])
    np.testing.assert_allclose(hermitian_solve(np.eye(3), v), v)
    np.testing.assert_allclose(hermitian_solve(np.diag([2.0, 4.0]), [2.0, 4.0]), [1, 1])


def test_solve_residual_on_random_hermitian_positive(rng):
    worst = 0.0
    for _ in range(1000):
        n = rng.integers(1, 17)
        B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = B @ B.conj().T + n * np.eye(n)
        rhs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = hermitian_solve(H, rhs)
        worst = max(worst, np.linalg.norm(H @ v - rhs) / np.linalg.norm(rhs))
    assert worst <= 1e-9


def test_singular_matrix_is_named():
    with pytest.raises(SingularMatrixError, match="Gram"):
        hermitian_solve(np.ones((3, 3)), np.ones(3), name="Gram")


def test_matmul_matches_triple_loop(rng):
    a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    b = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    ref = np.zeros((3, 2), dtype=complex)
    for i in range(3):
        for j in range(2):
            for k in range(4):
                ref[i, j] += a[i, k] * b[k, j]
    np.testing.assert_allclose(matmul(a, b), ref, atol=1e-14)
    v = rng.standard_normal(4)
    np.testing.assert_allclose(matmul(np.eye(4), v), v)
    assert np.all(matmul(np.zeros((2, 4)), v) == 0)


def test_matmul_shape_error_reports_both_shapes():
    with pytest.raises(ValueError, match=r"\(3, 4\).*\(3,\)"):
        matmul(np.zeros((3, 4)), np.zeros(3))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_matmul_associative(seed):
    r = np.random.default_rng(seed)
    a, b, c = (r.standard_normal((3, 3)) + 1j * r.standard_normal((3, 3)) for _ in range(3))
    np.testing.assert_allclose(matmul(matmul(a, b), c), matmul(a, matmul(b, c)), atol=1e-12)
