#!/usr/bin/env python3
"""Effective-sample-size study: error of the l1 solver versus n and versus
n / log d across dimensions, for the overlay plot where matched n / log d
points should align."""

import argparse
import math

from adahuber.dataio import write_records
from adahuber.simlab import run_neff_experiment


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--d-grid", default="100,500")
    p.add_argument("--neff-grid", default="30,60,120,240",
                   help="n is chosen per d as round(neff * log d)")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--c-tau", type=float, default=0.5)
    p.add_argument("--c-lambda", type=float, default=0.25)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default="neff.csv")
    args = p.parse_args()

    rows = []
    for d in (int(v) for v in args.d_grid.split(",")):
        ns = [round(float(ne) * math.log(d)) for ne in args.neff_grid.split(",")]
        rows.extend(
            run_neff_experiment([d], ns, reps=args.reps, seed=args.seed,
                                c_tau=args.c_tau, c_lambda=args.c_lambda,
                                threads=args.threads)
        )
    columns = ("d", "n", "n_eff", "mean_l2_error", "std_l2_error", "failed")
    write_records(rows, columns, args.out)
    for row in rows:
        print(f"d={row['d']:5d} n={row['n']:5d} n_eff={row['n_eff']:7.1f} "
              f"mean={row['mean_l2_error']:.3f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
