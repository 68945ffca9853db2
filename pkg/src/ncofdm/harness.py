"""Experiment orchestration: PSD, BER, continuity audit and complexity report.

Randomness is derived from ``numpy.random.SeedSequence(seed, spawn_key=...)``
keyed by stream tag and symbol/block index, so results do not depend on the
number of workers or the order in which work is scheduled.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AnalyticPsdParams,
    analytic_draw_powers,
    analytic_psd,
    complexity_counts,
    fine_grid,
    welch_psd,
    welch_view,
)
from .channel import ChannelRealization, add_awgn, eva_profile, load_profile, realize
from .nc_freq import build_precoder, precode_stream
from .ofdm import DeepFadeError, SystemParams, demodulate, modulate, qam_demap, qam_map
from .smoother import WINDOW_KINDS, WindowSpec, apply_smoother, build_smoother, junction_residual

log = logging.getLogger(__name__)

SIM_SCHEMES = ("ofdm", "nc_ofdm", "low_interference")

# spawn-key tags for independent random streams
_DATA, _CHANNEL, _NOISE = 1, 2, 3


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "low_interference"
    K: int = 256
    M: int = 2048
    M_cp: int = 144
    N: int = 2
    L: int = 144
    delta_f: float = 15e3
    qam_order: int = 16
    window: str = "blackman"
    num_symbols: int = 1000
    snr_db: tuple[float, ...] = (10.0, 15.0, 20.0, 25.0, 30.0)
    seed: int = 0
    oversampling: int = 8
    output_dir: str = "results"
    exclude_dc: bool = False
    anchor: str = "start"
    channel: str = "eva"            # "eva", "identity" or a profile file path
    min_errors: int = 100
    max_bits: int = 1_000_000
    ber_block: int = 50             # symbols per simulated burst
    seg_len: int = 2048
    overlap: int = 512
    analytic_draws: int = 64
    analytic_block: int = 64
    analytic_oversample: int = 8

    @property
    def schemes(self) -> tuple[str, ...]:
        return tuple(s.strip() for s in self.scheme.split(",") if s.strip())

    def params(self) -> SystemParams:
        return SystemParams(K=self.K, M=self.M, M_cp=self.M_cp, N=self.N, L=self.L,
                            delta_f=self.delta_f, exclude_dc=self.exclude_dc)

    def validate(self) -> "ExperimentConfig":
        try:
            self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        bad = [s for s in self.schemes if s not in SIM_SCHEMES]
        if not self.schemes or bad:
            raise ConfigError(f"unknown scheme(s) {bad or self.scheme!r}; choose from {SIM_SCHEMES}")
        if self.M != self.oversampling * self.K:
            raise ConfigError(f"M={self.M} must equal oversampling x K = {self.oversampling * self.K}")
        if self.qam_order not in (4, 16, 64):
            raise ConfigError(f"unsupported qam_order {self.qam_order}")
        if self.window not in WINDOW_KINDS:
            raise ConfigError(f"unknown window {self.window!r}")
        if "low_interference" in self.schemes and self.L < 2 * self.N + 2:
            raise ConfigError(f"L={self.L} too short for N={self.N}; need L >= 2N+2")
        if "nc_ofdm" in self.schemes and self.K < self.N + 1:
            raise ConfigError("nc_ofdm needs K >= N+1")
        for name in ("num_symbols", "min_errors", "max_bits", "ber_block", "seg_len",
                     "analytic_draws", "analytic_block", "analytic_oversample"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 <= self.overlap < self.seg_len:
            raise ConfigError("overlap must be in [0, seg_len)")
        if not self.snr_db:
            raise ConfigError("snr_db list is empty")
        if self.channel not in ("eva", "identity") and not Path(self.channel).is_file():
            raise ConfigError(f"channel profile {self.channel!r} not found")
        return self


def _coerce(name: str, typ, raw: str):
    raw = raw.strip()
    try:
        if typ in ("int", int):
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        if typ in ("float", float):
            return float(raw)
        if typ in ("bool", bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if "tuple" in str(typ):
            return tuple(float(v) for v in raw.replace(",", " ").split())
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` comments; unknown keys are errors."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, _FIELD_TYPES[key], value)
    return out


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    values = parse_config_text(Path(path).read_text()) if path else {}
    for key, value in (overrides or {}).items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = _coerce(key, _FIELD_TYPES[key], value) if isinstance(value, str) else value
    return ExperimentConfig(**values).validate()


# ---------------------------------------------------------------- shared pieces

def _rng(cfg: ExperimentConfig, tag: int, *index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(tag, *index)))


def _bits_per_symbol(cfg: ExperimentConfig) -> int:
    return int(np.log2(cfg.qam_order)) * cfg.K


def symbol_bits(cfg: ExperimentConfig, start: int, count: int) -> np.ndarray:
    """Bits of symbols start .. start+count-1, each drawn from its own seeded stream."""
    nb = _bits_per_symbol(cfg)
    return np.stack([_rng(cfg, _DATA, i).integers(0, 2, nb, dtype=np.int8) for i in range(start, start + count)])


class Transmitter:
    """Builds the transmit stream of one scheme; contexts are built once."""

    def __init__(self, cfg: ExperimentConfig, scheme: str):
        self.cfg, self.scheme = cfg, scheme
        self.p = cfg.params()
        self.smoother = None
        self.precoder = None
        if scheme == "low_interference":
            spec = WindowSpec(cfg.window, cfg.L, self.p.T_samp)
            self.smoother = build_smoother(self.p, spec, cfg.anchor)
        elif scheme == "nc_ofdm":
            self.precoder = build_precoder(self.p)

    def symbols(self, xs: np.ndarray) -> np.ndarray:
        """Frequency-domain symbols actually modulated (precoded for nc_ofdm)."""
        return precode_stream(xs, self.precoder) if self.precoder is not None else xs

    def transmit(self, xs: np.ndarray, return_coeffs: bool = False):
        xs = np.asarray(xs, dtype=complex)
        sent = self.symbols(xs)
        ys = modulate(sent, self.p)
        bs = None
        if self.smoother is not None:
            ys, bs = apply_smoother(ys, xs, self.smoother, return_coeffs=True)
        return (ys, sent, bs) if return_coeffs else ys


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".10g")
    return str(v)


def write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_manifest(cfg: ExperimentConfig, command: str, outputs) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()},
        "outputs": sorted(Path(o).name for o in outputs),
    }
    path = out / f"{command}.manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _pool_map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- PSD

def simulate_stream(cfg: ExperimentConfig, scheme: str | None = None) -> np.ndarray:
    """Concatenated transmit stream of ``num_symbols`` symbols (plus the closing symbol for LI)."""
    scheme = scheme or cfg.schemes[0]
    bits = symbol_bits(cfg, 0, cfg.num_symbols)
    xs = qam_map(bits.ravel(), cfg.qam_order, cfg.K)
    return Transmitter(cfg, scheme).transmit(xs).ravel()


def simulated_psd(cfg: ExperimentConfig, scheme: str | None = None):
    p = cfg.params()
    return welch_psd(simulate_stream(cfg, scheme), cfg.seg_len, cfg.overlap, fs=p.sample_rate)


@dataclass
class _AnalyticJob:
    cfg: ExperimentConfig
    draw_ids: list = field(default_factory=list)


def _analytic_params(cfg: ExperimentConfig) -> AnalyticPsdParams:
    p = cfg.params()
    return AnalyticPsdParams(p, fine_grid(p.sample_rate, cfg.seg_len, cfg.analytic_oversample),
                             window=cfg.window, draws=cfg.analytic_draws, block=cfg.analytic_block,
                             qam_order=cfg.qam_order, anchor=cfg.anchor)


def _analytic_chunk(job: _AnalyticJob) -> np.ndarray:
    return analytic_draw_powers(_analytic_params(job.cfg), job.cfg.seed, job.draw_ids)


def analytic_welch_psd(cfg: ExperimentConfig, workers: int = 1):
    """Analytic PSD (raw, on the fine grid) and its expected Welch reading on the Welch grid."""
    ap = _analytic_params(cfg)
    chunks = np.array_split(np.arange(cfg.analytic_draws), max(1, min(workers, cfg.analytic_draws)))
    parts = _pool_map(_analytic_chunk, [_AnalyticJob(cfg, list(map(int, c))) for c in chunks], workers)
    raw = analytic_psd(ap, cfg.seed, normalize=False, draw_powers=np.vstack(parts))
    p = cfg.params()
    return raw.peak_normalized(), welch_view(raw, p.sample_rate, cfg.seg_len, cfg.analytic_oversample)


def run_psd(cfg: ExperimentConfig, workers: int = 1) -> list[Path]:
    out = Path(cfg.output_dir)
    outputs = []
    for scheme in cfg.schemes:
        est = simulated_psd(cfg, scheme)
        outputs.append(write_csv(out / f"psd_{scheme}_welch.csv", ("freq_hz", "psd_db"),
                                 zip(est.freqs, est.db)))
        if scheme != "low_interference":
            continue
        if cfg.N > 2 or cfg.window not in ("blackman", "hanning"):
            log.warning("analytic PSD skipped: needs N <= 2 and a cosine-series window")
            continue
        raw, view = analytic_welch_psd(cfg, workers)
        outputs.append(write_csv(out / f"psd_{scheme}_analytic.csv", ("freq_hz", "psd_db"),
                                 zip(view.freqs, view.db)))
        outputs.append(write_csv(out / f"psd_{scheme}_analytic_raw.csv", ("freq_hz", "psd_db"),
                                 zip(raw.freqs, raw.db)))
    write_manifest(cfg, "psd", outputs)
    return outputs


# ---------------------------------------------------------------- BER

def _channel_profile(cfg: ExperimentConfig):
    if cfg.channel == "identity":
        return None
    if cfg.channel == "eva":
        return eva_profile()
    return load_profile(cfg.channel)


def _block_channels(cfg: ExperimentConfig, profile, block: int, count: int) -> list[ChannelRealization]:
    p = cfg.params()
    if profile is None:
        one = np.ones(1, dtype=complex)
        return [ChannelRealization(one, np.fft.fft(one, p.M))] * count
    rng = _rng(cfg, _CHANNEL, block)
    return [realize(profile, p.sample_rate, rng, p.M, p.M_cp) for _ in range(count)]


def _pass_channel(tx: np.ndarray, chans, total_len: int) -> np.ndarray:
    """Per-symbol block fading: each symbol is convolved with its own taps and overlap-added."""
    S, n = tx.shape
    rx = np.zeros(total_len, dtype=complex)
    for i in range(S):
        seg = np.convolve(tx[i], chans[i].taps)
        rx[i * n: i * n + seg.size] += seg
    return rx


def ber_point(cfg: ExperimentConfig, snr_db: float) -> list[tuple]:
    """Simulate one SNR point for every configured scheme on shared bursts.

    Bursts are keyed by index only, so every scheme (and every SNR) sees the
    same bits, fades and unit-variance noise. Stops once each scheme has
    ``min_errors`` errors or ``max_bits`` bits have been measured.
    """
    p = cfg.params()
    profile = _channel_profile(cfg)
    txs = {s: Transmitter(cfg, s) for s in cfg.schemes}
    errors = dict.fromkeys(cfg.schemes, 0)
    bits_seen = 0
    B = cfg.ber_block
    block = 0
    while True:
        bits = symbol_bits(cfg, block * B, B)
        xs = qam_map(bits.ravel(), cfg.qam_order, cfg.K)
        chans = _block_channels(cfg, profile, block, B + 1)
        total = (B + 1) * p.symbol_len + max(c.taps.size for c in chans)
        usable = []
        for i, c in enumerate(chans[:B]):
            if np.min(np.abs(c.freq_response[p.bins])) < 1e-12:
                log.info("burst %d symbol %d erased (deep fade)", block, i)
            else:
                usable.append(i)
        for scheme, tx in txs.items():
            ys = tx.transmit(xs)
            power = np.sum(np.abs(ys) ** 2) / (B * p.symbol_len)
            rx = _pass_channel(ys, chans, total)
            # same noise stream for every scheme: only its level follows the scheme's power
            rx = add_awgn(rx, snr_db, _rng(cfg, _NOISE, block), signal_power=power)
            for i in usable:
                seg = rx[i * p.symbol_len:(i + 1) * p.symbol_len]
                try:
                    est = demodulate(seg, chans[i].freq_response, p)
                except DeepFadeError:
                    continue
                errors[scheme] += int(np.count_nonzero(qam_demap(est, cfg.qam_order) != bits[i]))
        bits_seen += len(usable) * _bits_per_symbol(cfg)
        block += 1
        if bits_seen >= cfg.max_bits or all(e >= cfg.min_errors for e in errors.values()):
            break
    return [(snr_db, errors[s] / bits_seen if bits_seen else float("nan"), bits_seen, s)
            for s in cfg.schemes]


@dataclass
class _BerJob:
    cfg: ExperimentConfig
    snr_db: float


def _ber_job(job: _BerJob):
    return ber_point(job.cfg, job.snr_db)


def run_ber(cfg: ExperimentConfig, workers: int = 1) -> Path:
    results = _pool_map(_ber_job, [_BerJob(cfg, s) for s in cfg.snr_db], workers)
    rows = [row for point in results for row in point]
    path = write_csv(Path(cfg.output_dir) / "ber.csv", ("snr_db", "ber", "bits_measured", "scheme"), rows)
    write_manifest(cfg, "ber", [path])
    return path


# ---------------------------------------------------------------- continuity

def continuity_residuals(cfg: ExperimentConfig, scheme: str) -> np.ndarray:
    """(num_symbols, N+1) relative junction residuals for one scheme."""
    p = cfg.params()
    bits = symbol_bits(cfg, 0, cfg.num_symbols)
    xs = qam_map(bits.ravel(), cfg.qam_order, cfg.K)
    tx = Transmitter(cfg, scheme)
    ys, sent, bs = tx.transmit(xs, return_coeffs=True)
    ctx = tx.smoother or build_smoother(p, WindowSpec(cfg.window, cfg.L, p.T_samp), cfg.anchor)
    return junction_residual(ys, sent, bs, ctx, p)


def run_continuity_audit(cfg: ExperimentConfig, allow_plain: bool = False, workers: int = 1) -> Path:
    if "ofdm" in cfg.schemes and not allow_plain:
        raise ConfigError("continuity audit of plain ofdm is a negative control; pass allow_plain")
    rows = []
    for scheme in cfg.schemes:
        res = continuity_residuals(cfg, scheme)
        rows += [(i, n, res[i, n], scheme) for i in range(res.shape[0]) for n in range(res.shape[1])]
    path = write_csv(Path(cfg.output_dir) / "continuity.csv", ("junction", "order", "residual", "scheme"), rows)
    write_manifest(cfg, "continuity", [path])
    return path


# ---------------------------------------------------------------- complexity

COMPLEXITY_SCHEMES = ("nc_ofdm", "ncsp_ofdm", "low_interference")


def complexity_table(cfg: ExperimentConfig):
    reports = {s: complexity_counts(s, cfg.K, cfg.N, cfg.L) for s in COMPLEXITY_SCHEMES}
    ratios = []
    for num in COMPLEXITY_SCHEMES:
        for den in COMPLEXITY_SCHEMES:
            if num == den:
                continue
            a, b = reports[num], reports[den]
            ratios.append((num, den, a.real_mults / b.real_mults, a.real_adds / b.real_adds, a.total / b.total))
    return reports, ratios


def run_complexity(cfg: ExperimentConfig, workers: int = 1) -> list[Path]:
    reports, ratios = complexity_table(cfg)
    out = Path(cfg.output_dir)
    counts = write_csv(out / "complexity.csv", ("scheme", "real_mults", "real_adds", "total"),
                       [(r.scheme, r.real_mults, r.real_adds, r.total) for r in reports.values()])
    rat = write_csv(out / "complexity_ratios.csv",
                    ("numerator", "denominator", "mult_ratio", "add_ratio", "total_ratio"),
                    [(n, d, round(m, 6), round(a, 6), round(t, 6)) for n, d, m, a, t in ratios])
    write_manifest(cfg, "complexity", [counts, rat])
    return [counts, rat]
