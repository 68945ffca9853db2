"""Low-interference time-domain N-continuous smoothing.

Each CP-prefixed symbol gets a short correction ``w_i`` on its first ``L``
samples. ``w_i`` is a combination of windowed derivative pulses
``f^(n)(l) g(l)`` whose weights ``b_i`` make the stream and its first ``N``
derivatives continuous at the junction with the previous symbol.

Sample offsets ``l = m + M_cp`` run over ``0 .. L-1``; derivatives are taken
with respect to the sample index.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .numerics import SingularMatrixError, hermitian_solve
from .ofdm import SystemParams

WINDOW_KINDS = ("blackman", "hanning", "triangular")
ANCHORS = ("start", "literal")

# g(theta) = a0 + a1 cos(theta) + a2 cos(2 theta), theta = pi + pi l / (L-1)
_COSINE_SERIES = {
    "blackman": (0.42, -0.5, 0.08),
    "hanning": (0.5, -0.5, 0.0),
}


@dataclass(frozen=True)
class WindowSpec:
    """Descending half of a zero-edged window spanning ``L`` samples.

    The full window has length ``2L - 1``; its peak (value 1) sits at the
    support start and it reaches 0 at ``l = L - 1``. ``rho`` is the
    fundamental of the cosine series in Hz.
    """

    kind: str = "blackman"
    L: int = 144
    T_samp: float = 1.0

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ValueError(f"unknown window {self.kind!r}; choose from {WINDOW_KINDS}")
        if self.L < 2:
            raise ValueError("window support L must be at least 2")

    @property
    def rho(self) -> float:
        return 1.0 / ((2 * self.L - 2) * self.T_samp)

    @property
    def cosine_coeffs(self) -> tuple[float, float, float]:
        if self.kind not in _COSINE_SERIES:
            raise ValueError(f"{self.kind} window is not a cosine series")
        return _COSINE_SERIES[self.kind]

    def table(self, order: int) -> np.ndarray:
        """g^(j)(0) for j = 0 .. order."""
        return np.array([window_derivative(self, j, 0.0) for j in range(order + 1)])


def window_g(spec: WindowSpec, ell):
    return window_derivative(spec, 0, ell)


def window_derivative(spec: WindowSpec, j: int, ell):
    """j-th derivative (per sample) of the half window at offset ``ell``."""
    ell = np.asarray(ell, dtype=float)
    span = spec.L - 1
    if spec.kind == "triangular":
        if j == 0:
            return 1.0 - ell / span
        if j == 1:
            return np.full_like(ell, -1.0 / span)
        return np.zeros_like(ell)
    a0, a1, a2 = spec.cosine_coeffs
    rate = np.pi / span
    theta = np.pi + rate * ell
    shift = j * np.pi / 2
    out = a1 * rate**j * np.cos(theta + shift) + a2 * (2 * rate) ** j * np.cos(2 * theta + shift)
    return out + a0 if j == 0 else out


def _pulse_phase(p: SystemParams, anchor: str) -> np.ndarray:
    if anchor not in ANCHORS:
        raise ValueError(f"unknown anchor {anchor!r}; choose from {ANCHORS}")
    if anchor == "literal":
        return np.exp(1j * p.phi * p.k)
    return np.ones(p.K, dtype=complex)


def basis_f(n_tilde: int, ell, p: SystemParams, anchor: str = "start"):
    """(1/M)(j2pi/M)^n sum_r k_r^n c_r e^{j2pi k_r l / M}.

    With ``anchor="start"`` (default) ``c_r = 1``: the rectangular-pulse
    kernel peaks at the support start. ``anchor="literal"`` uses
    ``c_r = e^{j phi k_r}``, which for the standard geometry puts the pulse
    an integer number of nulls away and makes ``f(0)`` vanish.
    """
    ell = np.asarray(ell, dtype=float)
    k = p.k
    coef = (1.0 / p.M) * (2j * np.pi / p.M) ** n_tilde * k**n_tilde * _pulse_phase(p, anchor)
    phase = np.exp(2j * np.pi * np.multiply.outer(ell, k) / p.M)
    return phase @ coef


@dataclass(frozen=True)
class SmootherContext:
    params: SystemParams
    window: WindowSpec
    anchor: str
    Q: np.ndarray          # (L, N+1) windowed basis columns
    P_f: np.ndarray        # (N+1, N+1) junction derivatives of the basis
    P_f_inv: np.ndarray
    P1: np.ndarray         # (N+1, K)
    P2: np.ndarray         # P1 @ diag(Phi)
    f_table: np.ndarray    # f^(j)(0), j = 0 .. 2N
    g_table: np.ndarray    # g^(j)(0), j = 0 .. 2N

    @property
    def N(self) -> int:
        return self.params.N


def derivative_matrix(p: SystemParams) -> np.ndarray:
    """Rows (1/M)(j 2 pi k_r / M)^n, n = 0 .. N."""
    return np.vstack([(1.0 / p.M) * (2j * np.pi * p.k / p.M) ** n for n in range(p.N + 1)])


def build_smoother(p: SystemParams, spec: WindowSpec | None = None, anchor: str = "start") -> SmootherContext:
    N, L = p.N, p.L
    if spec is None:
        spec = WindowSpec("blackman", L, p.T_samp)
    if spec.L != L:
        raise ValueError(f"window support {spec.L} does not match L={L}")
    if L < 2 * N + 2:
        raise ValueError(f"L={L} too short for N={N}; need L >= 2N+2")
    if p.K < N + 1:
        raise ValueError(f"need K >= N+1 subcarriers, got K={p.K}")

    f_table = np.array([basis_f(j, 0.0, p, anchor) for j in range(2 * N + 1)])
    g_table = spec.table(2 * N)
    P_f = np.empty((N + 1, N + 1), dtype=complex)
    for n in range(N + 1):
        for nn in range(N + 1):
            P_f[n, nn] = sum(comb(n, j) * f_table[nn + j] * g_table[n - j] for j in range(n + 1))
    # rows scaled by the largest possible |f^(n)|, so rounding-level entries read as zero
    bound = np.array([np.sum(np.abs(2 * np.pi * p.k / p.M) ** n) / p.M for n in range(N + 1)])
    bound = np.where(bound > 0, bound, 1.0)
    try:
        P_f_inv = hermitian_solve(P_f / bound[:, None], np.diag(1.0 / bound),
                                  name="P_f (junction basis matrix)", scale=1.0)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"{exc}; try a larger L or a different window") from exc

    ell = np.arange(L, dtype=float)
    g = window_g(spec, ell)
    Q = np.column_stack([basis_f(n, ell, p, anchor) * g for n in range(N + 1)])
    Q[-1] = 0.0  # window edge is zero; remove rounding residue
    P1 = derivative_matrix(p)
    P2 = P1 * np.exp(1j * p.phi * p.k)[None, :]
    return SmootherContext(p, spec, anchor, Q, P_f, P_f_inv, P1, P2, f_table, g_table)


def smooth_coeffs(x_prev, x_cur, ctx: SmootherContext) -> np.ndarray:
    """b = P_f^{-1} (P1 x_prev - P2 x_cur). Works on single symbols or stacked rows."""
    x_prev = np.asarray(x_prev, dtype=complex)
    x_cur = np.asarray(x_cur, dtype=complex)
    rhs = x_prev @ ctx.P1.T - x_cur @ ctx.P2.T
    return rhs @ ctx.P_f_inv.T


def stream_coeffs(xs, ctx: SmootherContext) -> np.ndarray:
    """Coefficients for symbols 0 .. M_s (the last one closes the stream)."""
    xs = np.asarray(xs, dtype=complex)
    zero = np.zeros((1, xs.shape[1]), dtype=complex)
    return smooth_coeffs(np.vstack([zero, xs]), np.vstack([xs, zero]), ctx)


def apply_smoother(ys, xs, ctx: SmootherContext, return_coeffs: bool = False):
    """Overlay ``Q b_i`` on the first L samples of every symbol and append the closing symbol.

    Returns an array of shape (M_s + 1, M + M_cp).
    """
    ys = np.asarray(ys, dtype=complex)
    xs = np.asarray(xs, dtype=complex)
    p = ctx.params
    if ys.ndim != 2 or xs.ndim != 2 or ys.shape[0] != xs.shape[0]:
        raise ValueError(f"symbol count mismatch: ys {ys.shape} vs xs {xs.shape}")
    if ys.shape[1] != p.symbol_len:
        raise ValueError(f"expected TimeSymbols of length {p.symbol_len}")
    bs = stream_coeffs(xs, ctx)
    out = np.zeros((ys.shape[0] + 1, p.symbol_len), dtype=complex)
    out[:-1] = ys
    out[:, : p.L] += bs @ ctx.Q.T
    return (out, bs) if return_coeffs else out


def smooth_signal_derivative(b, n: int, ctx: SmootherContext, ell=0.0):
    """n-th derivative of w(l) = sum_n' b_n' f^(n')(l) g(l), by the product rule."""
    p, spec = ctx.params, ctx.window
    b = np.asarray(b, dtype=complex)
    total = 0.0
    for nn, bn in enumerate(b):
        for j in range(n + 1):
            total = total + bn * comb(n, j) * basis_f(nn + j, ell, p, ctx.anchor) * window_derivative(spec, n - j, ell)
    return total


def evaluate_symbol(x, b, ctx: SmootherContext, m):
    """Continuous-index value of a smoothed symbol at (fractional) positions m in [-M_cp, M]."""
    p = ctx.params
    m = np.asarray(m, dtype=float)
    y = np.exp(2j * np.pi * np.multiply.outer(m, p.k) / p.M) @ np.asarray(x, dtype=complex) / p.M
    if b is None:
        return y
    ell = m + p.M_cp
    inside = (ell >= 0) & (ell <= p.L - 1)
    w = np.zeros_like(y)
    if np.any(inside):
        w_in = smooth_signal_derivative(b, 0, ctx, ell[inside])
        w[inside] = w_in
    return y + w


def junction_residual(stream, xs, bs, ctx: SmootherContext, p: SystemParams | None = None) -> np.ndarray:
    """Relative derivative mismatch at the front junction of every data symbol.

    Row i holds, for n = 0 .. N, ``|ybar_i^(n)(-M_cp) - ybar_{i-1}^(n)(M)|``
    divided by the largest magnitude among the two one-sided values, the
    unsmoothed one-sided value and the stream's rms n-th derivative level.
    The last two keep the scale meaningful where both sides sit at zero,
    e.g. a junction against the silent symbol x_{-1} = 0. ``bs=None`` means
    no smoothing signal (plain or frequency-domain precoded streams).
    """
    p = p or ctx.params
    xs = np.asarray(xs, dtype=complex)
    stream = np.asarray(stream, dtype=complex)
    S = xs.shape[0]
    prev = np.vstack([np.zeros((1, p.K)), xs[:-1]])
    left = prev @ ctx.P1.T                   # ybar_{i-1}^(n)(M); w never reaches the tail
    y_right = xs @ ctx.P2.T                  # y_i^(n)(-M_cp)
    w_right = np.zeros_like(y_right)
    if bs is not None:
        bs = np.asarray(bs, dtype=complex)[:S]
        for n in range(p.N + 1):
            w_right[:, n] = [smooth_signal_derivative(b, n, ctx, 0.0) for b in bs]
    right = y_right + w_right
    # order 0 is read straight from the transmitted samples
    right[:, 0] = stream[:S, 0]
    typical = np.sqrt(np.sum(np.abs(ctx.P1) ** 2, axis=1) * np.mean(np.abs(xs) ** 2))
    scale = np.maximum.reduce([np.abs(left), np.abs(right), np.abs(y_right),
                               np.broadcast_to(typical, left.shape)])
    scale = np.where(scale > 0, scale, 1.0)
    return np.abs(right - left) / scale
