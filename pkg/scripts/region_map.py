"""Verdict map over a (p, q) grid for one (N, m, alpha), as CSV plus a
small text rendering (E exists, . none, ? inconclusive)."""

import argparse
import csv
from pathlib import Path

from polyharm.classifier import region_boundary_csv

SYMBOL = {"ExistsNontrivial": "E", "NoNontrivialSolution": ".", "Inconclusive": "?"}


def render(rows, samples):
    grid = [[" "] * samples for _ in range(samples)]
    for k, row in enumerate(rows):
        i, j = divmod(k, samples)
        grid[j][i] = SYMBOL[row["verdict"]]
    # q increases upwards
    return "\n".join("".join(line) for line in reversed(grid))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=5)
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--p-min", type=float, default=0.5)
    ap.add_argument("--p-max", type=float, default=4.0)
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--out", default="results/region.csv")
    args = ap.parse_args()
    rows = region_boundary_csv(args.N, args.m, args.alpha, (args.p_min, args.p_max), args.samples)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(render(rows, args.samples))
    print(f"wrote {len(rows)} rows to {path}")


if __name__ == "__main__":
    main()
