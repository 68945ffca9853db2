"""Gray-coded QAM and plain CP-OFDM synthesis/reception."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .numerics import dft, idft


class DeepFadeError(ValueError):
    """Channel response vanishes on an occupied subcarrier."""


@dataclass(frozen=True)
class SystemParams:
    """Static waveform parameters.

    ``M`` is the core symbol length in samples, ``M_cp`` the cyclic prefix,
    ``N`` the highest derivative order made continuous and ``L`` the support
    of the smoothing signal. Subcarrier indices default to a contiguous block
    centred on DC: ``-K/2 .. K/2-1`` (DC skipped when ``exclude_dc``).
    """

    K: int = 256
    M: int = 2048
    M_cp: int = 144
    N: int = 2
    L: int = 144
    delta_f: float = 15e3
    subcarrier_indices: tuple[int, ...] | None = None
    exclude_dc: bool = False

    def __post_init__(self):
        if self.subcarrier_indices is None:
            object.__setattr__(self, "subcarrier_indices", centered_indices(self.K, self.exclude_dc))
        else:
            object.__setattr__(self, "subcarrier_indices", tuple(int(k) for k in self.subcarrier_indices))
        ks = self.subcarrier_indices
        if len(ks) != self.K:
            raise ValueError(f"expected {self.K} subcarrier indices, got {len(ks)}")
        if len(set(ks)) != len(ks):
            raise ValueError("subcarrier indices must be distinct")
        if not 0 < self.L <= self.M_cp <= self.M:
            raise ValueError(f"need 0 < L <= M_cp <= M, got L={self.L}, M_cp={self.M_cp}, M={self.M}")
        if not 0 < self.K <= self.M:
            raise ValueError(f"need 0 < K <= M, got K={self.K}, M={self.M}")
        if self.N < 0:
            raise ValueError("N must be nonnegative")
        if any(not -self.M // 2 <= k < self.M / 2 for k in ks):
            raise ValueError("subcarrier indices must lie in [-M/2, M/2)")
        if self.delta_f <= 0:
            raise ValueError("delta_f must be positive")

    @cached_property
    def k(self) -> np.ndarray:
        return np.asarray(self.subcarrier_indices, dtype=float)

    @cached_property
    def bins(self) -> np.ndarray:
        return np.asarray(self.subcarrier_indices, dtype=int) % self.M

    @property
    def beta(self) -> float:
        return self.M_cp / self.M

    @property
    def phi(self) -> float:
        return -2 * np.pi * self.beta

    @property
    def T_s(self) -> float:
        return 1.0 / self.delta_f

    @property
    def T_cp(self) -> float:
        return self.beta * self.T_s

    @property
    def T_samp(self) -> float:
        return self.T_s / self.M

    @property
    def T(self) -> float:
        return self.T_s + self.T_cp

    @property
    def sample_rate(self) -> float:
        return self.M * self.delta_f

    @property
    def symbol_len(self) -> int:
        return self.M + self.M_cp


def centered_indices(K: int, exclude_dc: bool = False) -> tuple[int, ...]:
    if exclude_dc:
        lo = -(K // 2)
        hi = K - K // 2
        return tuple(k for k in range(lo, hi + 1) if k != 0)
    return tuple(range(-(K // 2), K - K // 2))


# ---------------------------------------------------------------- QAM

_SUPPORTED_ORDERS = (4, 16, 64)


def _axis_bits(order: int) -> int:
    if order not in _SUPPORTED_ORDERS:
        raise ValueError(f"unsupported QAM order {order}; choose from {_SUPPORTED_ORDERS}")
    return int(np.log2(order)) // 2


def _axis_levels(m: int) -> np.ndarray:
    """Amplitude of each per-axis Gray label 0 .. 2**m - 1 (label 0 is the largest level)."""
    labels = np.arange(2**m)
    idx = labels.copy()
    shift = labels >> 1
    while np.any(shift):
        idx ^= shift
        shift >>= 1
    return (2**m - 1) - 2.0 * idx


def qam_scale(order: int) -> float:
    """Factor giving unit average energy, e.g. 1/sqrt(10) for 16-QAM."""
    m = _axis_bits(order)
    return 1.0 / np.sqrt(2 * np.mean(_axis_levels(m) ** 2))


def constellation(order: int) -> np.ndarray:
    """Points indexed by their big-endian bit label (I bits first, then Q bits)."""
    m = _axis_bits(order)
    lv = _axis_levels(m)
    labels = np.arange(order)
    return (lv[labels >> m] + 1j * lv[labels & (2**m - 1)]) * qam_scale(order)


def _bits_to_int(bits: np.ndarray, width: int) -> np.ndarray:
    weights = 1 << np.arange(width - 1, -1, -1)
    return bits.reshape(-1, width) @ weights


def qam_map(bits, order: int = 16, K: int | None = None) -> np.ndarray:
    """Map a bit stream to QAM symbols; returns shape (num_symbols, K) when K is given."""
    m = _axis_bits(order)
    bps = 2 * m
    bits = np.asarray(bits, dtype=np.int64).ravel()
    frame = bps * (K or 1)
    if bits.size % frame:
        raise ValueError(f"bit count {bits.size} not divisible by {frame}")
    points = constellation(order)[_bits_to_int(bits, bps)] if bits.size else np.zeros(0, complex)
    return points.reshape(-1, K) if K else points


def qam_demap(symbols, order: int = 16) -> np.ndarray:
    """Hard-decision demapper, sliced independently on I and Q.

    A value exactly midway between two levels goes to the level with the
    smaller Gray label.
    """
    m = _axis_bits(order)
    s = np.asarray(symbols, dtype=complex).ravel() / qam_scale(order)
    lv = _axis_levels(m)

    def slice_axis(v):
        # argmin returns the first minimum, i.e. the smallest label on ties
        return np.argmin(np.abs(v[:, None] - lv[None, :]), axis=1)

    labels = (slice_axis(s.real) << m) | slice_axis(s.imag)
    bps = 2 * m
    shifts = np.arange(bps - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(np.int8).ravel()


# ---------------------------------------------------------------- OFDM

def modulate(x, p: SystemParams) -> np.ndarray:
    """CP-prefixed symbol(s): samples m = -M_cp .. M-1 of (1/M) sum_r x_r e^{j2pi k_r m/M}.

    Accepts one symbol (K,) or a batch (S, K).
    """
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != p.K:
        raise ValueError(f"expected {p.K} subcarrier values, got {x.shape[-1]}")
    if x.ndim == 1:
        grid = np.zeros(p.M, dtype=complex)
        grid[p.bins] = x
        core = idft(grid)
        return np.concatenate([core[-p.M_cp:], core])
    grid = np.zeros((x.shape[0], p.M), dtype=complex)
    grid[:, p.bins] = x
    core = np.fft.ifft(grid, axis=1)
    return np.concatenate([core[:, -p.M_cp:], core], axis=1)


def demodulate(rx, channel_freq, p: SystemParams) -> np.ndarray:
    """Strip the CP, transform, and zero-force the occupied bins."""
    rx = np.asarray(rx, dtype=complex)
    if rx.shape[-1] != p.symbol_len:
        raise ValueError(f"expected {p.symbol_len} samples, got {rx.shape[-1]}")
    H = np.asarray(channel_freq, dtype=complex)
    if H.shape[-1] != p.M:
        raise ValueError(f"channel response must have length M={p.M}")
    Hk = H[..., p.bins]
    if np.any(np.abs(Hk) < 1e-12):
        raise DeepFadeError("channel response below 1e-12 on an occupied subcarrier")
    if rx.ndim == 1:
        spec = dft(rx[p.M_cp:])
    else:
        spec = np.fft.fft(rx[:, p.M_cp:], axis=1)
    return spec[..., p.bins] / Hk
