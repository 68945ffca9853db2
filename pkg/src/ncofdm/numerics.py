"""Small complex linear-algebra and transform kernel.

Synthesis (subcarrier -> time) carries the 1/M factor; analysis does not,
so ``dft(idft(x)) == x``.
"""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg


class SingularMatrixError(np.linalg.LinAlgError):
    """A small dense system could not be solved reliably."""


def _as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size == 0:
        raise ValueError("transform of a zero-length vector is undefined")
    return v


def idft(spectrum) -> np.ndarray:
    """out[m] = (1/M) * sum_k spectrum[k] * exp(j 2 pi k m / M)."""
    return np.fft.ifft(_as_vector(spectrum))


def dft(signal) -> np.ndarray:
    """out[k] = sum_m signal[m] * exp(-j 2 pi k m / M)."""
    return np.fft.fft(_as_vector(signal))


def naive_dft(signal, inverse: bool = False) -> np.ndarray:
    """O(M^2) reference transform with the same scaling as dft/idft."""
    x = _as_vector(signal)
    M = x.size
    m = np.arange(M)
    sign = 1.0 if inverse else -1.0
    kernel = np.exp(sign * 2j * np.pi * np.outer(m, m) / M)
    out = kernel @ x
    return out / M if inverse else out


def matmul(a, b) -> np.ndarray:
    """Matrix-matrix or matrix-vector product with an explicit shape check."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim not in (1, 2) or a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} x {b.shape}")
    return a @ b


matvec = matmul


def hermitian_solve(H, rhs, name: str = "matrix", scale: float | None = None) -> np.ndarray:
    """Solve ``H v = rhs`` for a small dense square ``H`` (LU, partial pivoting).

    ``rhs`` may be a vector or a matrix of stacked right-hand sides.
    Raises SingularMatrixError when a pivot falls below 1e-12 times
    ``scale`` (default: the largest entry of ``H``).
    """
    H = np.asarray(H, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"{name} must be square, got shape {H.shape}")
    if rhs.shape[0] != H.shape[0]:
        raise ValueError(f"shape mismatch: {name} {H.shape} vs rhs {rhs.shape}")
    if scale is None:
        scale = np.max(np.abs(H)) if H.size else 0.0
    if np.max(np.abs(H)) == 0.0:
        raise SingularMatrixError(f"{name} is identically zero")
    with warnings.catch_warnings():
        # singularity is reported below with our own threshold
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(H, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) < 1e-12 * scale:
        raise SingularMatrixError(
            f"{name} is numerically singular "
            f"(smallest pivot {np.min(pivots):.3e}, largest entry {scale:.3e})"
        )
    return scipy.linalg.lu_solve((lu, piv), rhs)
