"""Frequency-domain N-continuous precoding (the classic NC-OFDM chain)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import hermitian_solve
from .ofdm import SystemParams


@dataclass(frozen=True)
class PrecoderContext:
    A: np.ndarray        # (N+1, K), entries k_r**n
    Phi: np.ndarray      # (K,), diagonal of exp(j phi k_r)
    P: np.ndarray        # (K, K) projector
    IminusP: np.ndarray


def constraint_matrix(k, N: int) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    # numpy defines 0.0**0 == 1, matching the all-ones first row
    return np.vstack([k**n for n in range(N + 1)])


def build_precoder(p: SystemParams) -> PrecoderContext:
    if p.K < p.N + 1:
        raise ValueError(f"need K >= N+1 subcarriers, got K={p.K}, N={p.N}")
    k = p.k
    A = constraint_matrix(k, p.N)
    # P is invariant to row scaling of A; scale by kmax**n so A A^H stays well conditioned.
    kmax = max(1.0, float(np.max(np.abs(k))))
    As = constraint_matrix(k / kmax, p.N).astype(complex)
    Phi = np.exp(1j * p.phi * k)
    APhi = As * Phi
    P = APhi.conj().T @ hermitian_solve(As @ As.conj().T, APhi, name="A A^H")
    P = 0.5 * (P + P.conj().T)
    return PrecoderContext(A=A, Phi=Phi, P=P, IminusP=np.eye(p.K) - P)


def precode_stream(xs, ctx: PrecoderContext) -> np.ndarray:
    """x_bar_0 = x_0; x_bar_i = (I - P) x_i + P Phi^H x_bar_{i-1}."""
    xs = np.asarray(xs, dtype=complex)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise ValueError("expected a nonempty (num_symbols, K) array")
    out = np.empty_like(xs)
    out[0] = xs[0]
    # (I - P) x_i does not depend on the recursion; batch it.
    free = xs @ ctx.IminusP.T
    PPhiH = ctx.P * ctx.Phi.conj()[None, :]
    for i in range(1, xs.shape[0]):
        out[i] = free[i] + PPhiH @ out[i - 1]
    return out
