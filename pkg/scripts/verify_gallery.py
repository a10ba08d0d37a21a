#!/usr/bin/env python3
"""Audit every family in the gallery and print one summary line per check.

Usage: python scripts/verify_gallery.py [--samples N] [--seed S]
"""
import argparse
import sys

import numpy as np

import proflim as pl

SIZES = {"euclid": {"max_level": 10}, "poly": {"max_degree": 10},
         "jet": {"max_order": 10}, "matrix": {"max_n": 8},
         "symplectic": {"max_pairs": 5}, "odd-symplectic": {"max_dim": 9}}


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    failures = 0
    for name in pl.gallery_names():
        g = pl.build_gallery(name, **SIZES.get(name, {}))
        rng = np.random.default_rng(args.seed)
        report = pl.verify_family(g.family, points_per_chain=args.samples,
                                  rng=rng)
        print(f"== {name} ==")
        print(report.summary())
        failures += 0 if report.passed else 1
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
