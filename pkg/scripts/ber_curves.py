"""Paired BER curves (OFDM, NC-OFDM, LI) over EVA block fading."""
import argparse

from ncofdm.harness import load_config, run_ber


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/ber.cfg")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = load_config(args.config)
    path = run_ber(cfg, args.workers)
    with open(path) as fh:
        next(fh)
        by_snr = {}
        for line in fh:
            snr, ber, bits, scheme = line.strip().split(",")
            by_snr.setdefault(snr, {})[scheme] = float(ber)
    for snr, row in by_snr.items():
        cells = "  ".join(f"{s} {b:.2e}" for s, b in row.items())
        print(f"{snr:>4} dB  {cells}")
    print(path)


if __name__ == "__main__":
    main()
