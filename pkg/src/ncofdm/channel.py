"""Block-fading Rayleigh multipath channel and AWGN."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChannelProfile:
    tap_delays: np.ndarray   # seconds
    tap_powers: np.ndarray   # linear, unit sum

    def __post_init__(self):
        d = np.asarray(self.tap_delays, dtype=float)
        pw = np.asarray(self.tap_powers, dtype=float)
        if d.shape != pw.shape or d.ndim != 1 or d.size == 0:
            raise ValueError("delays and powers must be equal-length 1-D arrays")
        if np.any(d < 0) or np.any(np.diff(d) <= 0):
            raise ValueError("tap delays must be nonnegative and strictly increasing")
        if np.any(pw < 0):
            raise ValueError("tap powers must be nonnegative")
        object.__setattr__(self, "tap_delays", d)
        object.__setattr__(self, "tap_powers", pw / pw.sum())

    def max_delay_samples(self, sample_rate: float) -> int:
        return int(np.round(self.tap_delays[-1] * sample_rate))


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray            # sample-spaced delay line
    freq_response: np.ndarray   # length-M DFT of the zero-padded taps
    exceeds_cp: bool = False


def load_profile(path) -> ChannelProfile:
    """Read ``delay_ns power_db`` pairs, one per line; ``#`` starts a comment."""
    return parse_profile(Path(path).read_text())


def parse_profile(text: str) -> ChannelProfile:
    delays, powers = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'delay_ns power_db', got {raw!r}")
        delays.append(float(parts[0]) * 1e-9)
        powers.append(10 ** (float(parts[1]) / 10))
    return ChannelProfile(np.array(delays), np.array(powers))


def eva_profile() -> ChannelProfile:
    text = resources.files("ncofdm").joinpath("data/eva.txt").read_text()
    return parse_profile(text)


def realize(profile: ChannelProfile, sample_rate: float, rng=None, M: int = 2048,
            M_cp: int | None = None) -> ChannelRealization:
    """Draw one block-fading realization on a sample-spaced delay line.

    Path gains are circular complex Gaussian with variance equal to the path
    power; paths rounding to the same sample add.
    """
    rng = np.random.default_rng(rng)
    lags = np.round(profile.tap_delays * sample_rate).astype(int)
    n = profile.tap_powers.size
    gains = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(profile.tap_powers / 2)
    taps = np.zeros(lags[-1] + 1, dtype=complex)
    np.add.at(taps, lags, gains)
    if taps.size > M:
        raise ValueError(f"delay line ({taps.size} taps) longer than the DFT size {M}")
    exceeds = M_cp is not None and lags[-1] > M_cp
    if exceeds:
        log.warning("delay spread of %d samples exceeds the cyclic prefix (%d)", lags[-1], M_cp)
    return ChannelRealization(taps, np.fft.fft(taps, M), exceeds)


def apply_channel(signal, ch: ChannelRealization | np.ndarray, full: bool = False) -> np.ndarray:
    """Linear convolution with the delay line, truncated to the input length unless ``full``."""
    taps = ch.taps if isinstance(ch, ChannelRealization) else np.asarray(ch, dtype=complex)
    x = np.asarray(signal, dtype=complex)
    y = np.convolve(x, taps)
    return y if full else y[: x.size]


def add_awgn(signal, snr_db: float, rng=None, signal_power: float | None = None) -> np.ndarray:
    """Add circular Gaussian noise at ``snr_db`` relative to the signal's mean power.

    ``snr_db = inf`` returns the input unchanged. ``signal_power`` overrides
    the measured power (used when the SNR refers to the transmitted stream).
    """
    x = np.asarray(signal, dtype=complex)
    if x.size == 0:
        raise ValueError("empty signal")
    if np.isinf(snr_db) and snr_db > 0:
        return x.copy()
    power = np.mean(np.abs(x) ** 2) if signal_power is None else signal_power
    if power <= 0:
        raise ValueError("SNR is undefined for a zero-power signal")
    rng = np.random.default_rng(rng)
    sigma2 = power / 10 ** (snr_db / 10)
    noise = (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)) * np.sqrt(sigma2 / 2)
    return x + noise
