"""Out-of-band levels and roll-off exponents for OFDM, NC-OFDM and LI smoothing."""
import argparse
from pathlib import Path

import numpy as np

from ncofdm.analysis import slope_fit
from ncofdm.harness import ExperimentConfig, simulated_psd, write_csv

CASES = {
    "ofdm": dict(scheme="ofdm"),
    "nc_ofdm_N2": dict(scheme="nc_ofdm", N=2),
    "li_N0_L144": dict(N=0),
    "li_N1_L144": dict(N=1),
    "li_N2_L36": dict(N=2, L=36),
    "li_N2_L72": dict(N=2, L=72),
    "li_N2_L144": dict(N=2),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/sidelobes")
    ap.add_argument("--num-symbols", type=int, default=1000)
    ap.add_argument("--offset", type=float, default=1e6, help="out-of-band offset in Hz")
    args = ap.parse_args()

    rows = []
    for name, kw in CASES.items():
        cfg = ExperimentConfig(num_symbols=args.num_symbols, **kw).validate()
        p = cfg.params()
        est = simulated_psd(cfg)
        hi = (p.k.max() + 0.5) * p.delta_f
        lo = (p.k.min() - 0.5) * p.delta_f
        level = 10 * np.log10(0.5 * (est.at(hi + args.offset) + est.at(lo - args.offset)))
        alpha = slope_fit(est, (hi + 1e6, hi + 6e6))
        write_csv(Path(args.out) / f"psd_{name}.csv", ("freq_hz", "psd_db"), zip(est.freqs, est.db))
        rows.append((name, level, alpha))
        print(f"{name:>12}: {level:7.1f} dB at +{args.offset / 1e6:g} MHz, exponent {alpha:6.2f}")
    write_csv(Path(args.out) / "summary.csv", ("case", "level_db", "exponent"), rows)


if __name__ == "__main__":
    main()
