#!/usr/bin/env python3
"""Synthetic height records in the Berkeley growth-study layout.

39 subjects measured at 31 ages (1 to 18 years), heights in cm rounded to
0.1. Writes heights.csv (id,<one column per age>) and ages.csv (age).

Up to age 10:
    h(s) = h0 + A (1 - exp(-k (s - 1))) + v (s - 1) + m Phi((s - 7) / 0.7)
After age 10 a linear term and a pubertal logistic gain are added:
    h(s) = h(10) + v2 (s - 10) + G (L((s - tp) / 0.9) - L((10 - tp) / 0.9))
"""

import argparse
import csv
import math
import pathlib

import numpy as np

AGES = [1.0, 1.25, 1.5, 1.75, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0] + [8.0 + 0.5 * i for i in range(21)]


def phi(z):
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def logistic(z):
    return 1.0 / (1.0 + math.exp(-z))


def subject(rng):
    h0 = rng.normal(76.0, 2.5)
    a = rng.normal(12.0, 2.5)
    k = math.exp(rng.normal(math.log(0.557), 0.15))
    v = rng.normal(5.3, 0.4)
    m = rng.normal(0.6, 0.4)
    v2 = max(0.0, rng.normal(1.0, 0.3))
    g = 18.0 + 2.0 * (v - 5.3) / 0.4 + rng.normal(0.0, 2.5)
    tp = rng.normal(14.0, 0.8)

    def early(s):
        return h0 + a * (1.0 - math.exp(-k * (s - 1.0))) + v * (s - 1.0) + m * phi((s - 7.0) / 0.7)

    def height(s):
        if s <= 10.0:
            return early(s)
        return (early(10.0) + v2 * (s - 10.0)
                + g * (logistic((s - tp) / 0.9) - logistic((10.0 - tp) / 0.9)))

    return [round(height(s), 1) for s in AGES]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data")
    ap.add_argument("--n", type=int, default=39)
    ap.add_argument("--seed", type=int, default=1945)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "ages.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["age"])
        for s in AGES:
            w.writerow([f"{s:g}"])
    with open(out / "heights.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id"] + [f"{s:g}" for s in AGES])
        for i in range(args.n):
            w.writerow([f"boy{i + 1:02d}"] + [f"{h:.1f}" for h in subject(rng)])


if __name__ == "__main__":
    main()
