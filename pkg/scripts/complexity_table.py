"""Transmitter operation counts for a sweep of (N, L) at K = 256."""
import argparse
from pathlib import Path

from ncofdm.analysis import complexity_counts
from ncofdm.harness import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--K", type=int, default=256)
    ap.add_argument("--out", default="results/complexity_sweep.csv")
    args = ap.parse_args()

    rows = []
    for N in range(5):
        for L in (36, 72, 144):
            nc = complexity_counts("nc_ofdm", args.K, N, L)
            ncsp = complexity_counts("ncsp_ofdm", args.K, N, L)
            li = complexity_counts("low_interference", args.K, N, L)
            rows.append((N, L, li.real_mults, nc.real_mults, ncsp.real_mults,
                         round(li.real_mults / nc.real_mults, 4), round(li.real_mults / ncsp.real_mults, 4)))
    path = write_csv(Path(args.out), ("N", "L", "li_mults", "nc_mults", "ncsp_mults", "li_over_nc", "li_over_ncsp"),
                     rows)
    for r in rows:
        if r[1] == 144:
            print(f"N={r[0]} L=144: LI {r[2]:5d}  NC {r[3]:5d}  NCSP {r[4]:5d}  LI/NC {r[5]:.3f}  LI/NCSP {r[6]:.3f}")
    print(path)


if __name__ == "__main__":
    main()
