"""Empirical counts of grid Katetov functions and of approximant growth.

There is no closed form for how many Katetov functions with values in
{0, 1/q, ..., B} a finite space carries; this tabulates them for small
spaces and records how fast the one-point growth step inflates a seed.

    python scripts/count_profiles.py [--max-points 4] [--csv results/profiles.csv]
"""

import argparse
import csv
import sys
import time
from pathlib import Path

from katetov.approximant import Grid, build_approximant
from katetov.errors import SizeBudgetExceeded
from katetov.functions import enumerate_profiles, grid_levels
from katetov.oracles import grid_metric_spaces
from katetov.suite import SEEDS, seed_space


def profile_table(max_points, grids):
    rows = []
    for q, cap in grids:
        for n in range(1, max_points + 1):
            counts = [sum(1 for _ in enumerate_profiles(s.dist, grid_levels(q, cap)))
                      for s in grid_metric_spaces(n, q, cap)]
            rows.append({"grid": f"{q}:{cap}", "points": n, "spaces": len(counts),
                         "min": min(counts), "max": max(counts),
                         "mean": round(sum(counts) / len(counts), 2)})
    return rows


def growth_table(seeds, grids, k, max_rounds, budget):
    rows = []
    for name in seeds:
        for q, cap in grids:
            for r in range(max_rounds + 1):
                t0 = time.perf_counter()
                try:
                    X = build_approximant(seed_space(name), k, r, Grid(q, cap), budget)
                    size, wk = len(X.space), X.witness_k
                except SizeBudgetExceeded:
                    size, wk = f">{budget}", None
                rows.append({"seed": name, "grid": f"{q}:{cap}", "k": k, "rounds": r,
                             "points": size, "witness_k": wk,
                             "seconds": round(time.perf_counter() - t0, 2)})
                if wk is None:
                    break
    return rows


def show(rows):
    keys = list(rows[0])
    widths = {k: max(len(k), *(len(str(r[k])) for r in rows)) for k in keys}
    print("  ".join(k.rjust(widths[k]) for k in keys))
    for r in rows:
        print("  ".join(str(r[k]).rjust(widths[k]) for k in keys))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-points", type=int, default=4)
    ap.add_argument("--rounds", type=int, default=3)
    ap.add_argument("--budget", type=int, default=4096)
    ap.add_argument("--csv", help="also write both tables here (two files, suffixed)")
    args = ap.parse_args()

    profiles = profile_table(args.max_points, [(1, 2), (2, 2)])
    show(profiles)
    print()
    growth = growth_table(list(SEEDS), [(1, 2), (2, 2)], 2, args.rounds, args.budget)
    show(growth)

    if args.csv:
        base = Path(args.csv)
        base.parent.mkdir(parents=True, exist_ok=True)
        for tag, rows in (("profiles", profiles), ("growth", growth)):
            path = base.with_name(f"{base.stem}_{tag}{base.suffix or '.csv'}")
            with path.open("w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]))
                w.writeheader()
                w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
