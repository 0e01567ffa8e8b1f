"""Run the acceptance battery and write the report plus a timing table.

    python scripts/run_suite.py --out results/suite.json [--jobs 4]
"""

import argparse
import sys
from pathlib import Path

from katetov.approximant import Grid
from katetov.config import RunConfig
from katetov.suite import canonical_json, run_suite


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/suite.json")
    ap.add_argument("--grid", default="2:2")
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--rounds", type=int, default=2)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg = RunConfig(grid=Grid.parse(args.grid), k=args.k, rounds=args.rounds, jobs=args.jobs)
    timings: dict = {}
    report = run_suite(cfg, timings)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(canonical_json(report))

    print(f"{'criterion':<42} {'verdict':>7} {'seconds':>8}")
    for c in report["criteria"]:
        t = timings.get(str(c["id"]))
        print(f"{c['id']}. {c['name']:<39} {'pass' if c['passed'] else 'FAIL':>7} "
              f"{'' if t is None else f'{t:8.1f}'}")
    print(f"report written to {out}")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
