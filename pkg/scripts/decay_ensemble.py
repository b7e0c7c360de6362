#!/usr/bin/env python3
"""Correlation decay slopes over an ensemble of randomly rotated schedules.

For each seed, builds a fixed-shape random schedule, lifts fourth-root labels,
and fits the log-log slope of the mid-window correlation statistic across
stages.  Prints one line per seed and the ensemble median at the end.
"""

from __future__ import annotations

import argparse

import numpy as np

import icelab as il


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20, help="number of seeds")
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--q", type=int, default=256, help="copies per stage")
    ap.add_argument("--stages", type=int, default=2, help="number of random stages")
    ap.add_argument("--seed-word", default="0123" * 4)
    ap.add_argument("--statistic", choices=["max", "median", "rms"], default="median")
    args = ap.parse_args()

    alphabet = il.Alphabet(tuple("0123"))
    w0 = il.word_from_text(alphabet, args.seed_word)
    labels = {"0": 1 + 0j, "1": 1j, "2": -1 + 0j, "3": -1j}

    slopes = []
    for seed in range(args.base_seed, args.base_seed + args.seeds):
        sch = il.random_schedule([args.q] * args.stages, seed, w0)
        profile = il.decay_profile(sch, labels, 0, args.stages, statistic=args.statistic)
        slopes.append(profile.slope)
        stats = ", ".join(f"h={s.h}: {getattr(s, args.statistic):.3e}" for s in profile.stages)
        print(f"seed {seed:3d}  slope {profile.slope:+.4f}   {stats}")

    print(f"\nmedian slope over {args.seeds} seeds: {np.median(slopes):+.4f}")


if __name__ == "__main__":
    main()
