#!/usr/bin/env python3
"""Generate the bundled sample dataset (data/sample_treasury.csv).

Synthetic daily par-yield curves in the Treasury CSV format: Nelson-Siegel
factors following slow AR(1) dynamics plus small observation noise, rounded
to two decimals like the published files. Seeded, so the output is
reproducible.
"""
import argparse
import datetime as dt
import math
import random

TERMS = [("1 Mo", 1), ("3 Mo", 3), ("6 Mo", 6), ("1 Yr", 12), ("2 Yr", 24),
         ("3 Yr", 36), ("5 Yr", 60), ("7 Yr", 84), ("10 Yr", 120),
         ("20 Yr", 240), ("30 Yr", 360)]


def ns_loadings(tau, lam):
    u = lam * tau
    f1 = (1.0 - math.exp(-u)) / u
    return 1.0, f1, f1 - math.exp(-u)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--days", type=int, default=620)
    ap.add_argument("--seed", type=int, default=20060206)
    ap.add_argument("--start", default="2006-02-06")
    ap.add_argument("--out", default="data/sample_treasury.csv")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    lam = 0.055
    # level, slope, curvature: slow mean-reverting walks
    factors = [4.60, -0.20, 0.30]
    means = [4.60, -0.20, 0.30]
    phis = [0.999, 0.998, 0.997]
    sds = [0.035, 0.045, 0.060]

    date = dt.date.fromisoformat(args.start)
    rows = []
    while len(rows) < args.days:
        if date.weekday() < 5:  # business days only
            for i in range(3):
                factors[i] = (means[i] + phis[i] * (factors[i] - means[i]) +
                              rng.gauss(0.0, sds[i]))
            yields = []
            for _, months in TERMS:
                l0, l1, l2 = ns_loadings(months, lam)
                y = (factors[0] * l0 + factors[1] * l1 + factors[2] * l2 +
                     rng.gauss(0.0, 0.012))
                yields.append(min(max(round(y, 2), 0.01), 24.99))
            rows.append((date, yields))
        date += dt.timedelta(days=1)

    with open(args.out, "w") as f:
        f.write("Date," + ",".join(name for name, _ in TERMS) + "\n")
        for d, ys in rows:
            f.write(d.strftime("%m/%d/%Y") + "," +
                    ",".join(f"{y:.2f}" for y in ys) + "\n")
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
