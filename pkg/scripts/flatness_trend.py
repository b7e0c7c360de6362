#!/usr/bin/env python3
"""Flatness of exponential-frequency trigonometric sums as the term count grows.

Evaluates the normalized real-frequency sums on a line segment and prints the
sup/mean/rms deviations of |P| from its flat profile for each term count.
"""

from __future__ import annotations

import argparse

import icelab as il


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--counts", default="250,500,1000,2000",
                    help="comma list of term counts n")
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--a", type=float, default=1.0, help="segment start")
    ap.add_argument("--b", type=float, default=2.0, help="segment end")
    ap.add_argument("--points", type=int, default=10001)
    args = ap.parse_args()

    grid = il.LineGrid(args.a, args.b, args.points)
    print(f"{'n':>6} {'sup dev':>10} {'mean dev':>10} {'rms sq dev':>11}")
    for tok in args.counts.split(","):
        n = int(tok)
        pg = il.eval_polynomial(il.exp_frequency_set(n, args.eps), grid, "M_R")
        m = il.flatness_metrics(pg)
        print(f"{n:>6} {m.sup_deviation:>10.4f} {m.mean_deviation:>10.4f} "
              f"{m.rms_square_deviation:>11.4f}")


if __name__ == "__main__":
    main()
