"""Command line entry point: ``ncofdm {psd,ber,continuity,complexity} --config FILE``.

Every config key is also a flag (``--num-symbols 200``, ``--snr-db "10 20"``).
Exit status: 0 success, 2 invalid configuration, 1 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from . import harness
from .harness import ConfigError, ExperimentConfig


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncofdm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("psd", "Welch (and analytic) PSD curves"),
                        ("ber", "BER versus SNR over the fading channel"),
                        ("continuity", "junction derivative residuals"),
                        ("complexity", "transmitter operation counts")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "continuity":
            sp.add_argument("--allow-ofdm", action="store_true",
                            help="permit plain ofdm as a negative control")
        for f in fields(ExperimentConfig):
            sp.add_argument("--" + f.name.replace("_", "-"), dest="cfg_" + f.name, default=None, metavar="V")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    try:
        cfg = harness.load_config(args.config, overrides)
        if args.command == "psd":
            paths = harness.run_psd(cfg, args.workers)
        elif args.command == "ber":
            paths = [harness.run_ber(cfg, args.workers)]
        elif args.command == "continuity":
            paths = [harness.run_continuity_audit(cfg, args.allow_ofdm, args.workers)]
        else:
            paths = harness.run_complexity(cfg)
            reports, ratios = harness.complexity_table(cfg)
            for num, den, m, a, t in ratios:
                if num == "low_interference":
                    print(f"{num}/{den}: mults {m:.3f} adds {a:.3f} total {t:.3f}")
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        logging.getLogger("ncofdm").exception("run failed")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0
