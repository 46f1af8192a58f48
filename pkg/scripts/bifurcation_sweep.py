#!/usr/bin/env python3
"""Sweep the common success rate p and record every fixed point of the update map.

Produces the bifurcation data for the symmetric regime: a unique central fixed
point below the threshold p(m), and the pitchfork pair alpha, 1 - alpha above
it.  Writes a CSV with one row per (p, fixed point).

Usage:
    python scripts/bifurcation_sweep.py --m 3 --steps 200 --out bifurcation_m3.csv
"""

import argparse
import sys

from treemajority.dynamics import find_fixed_points, solve_threshold
from treemajority.model import ModelParams


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=3)
    parser.add_argument("--steps", type=int, default=200, help="number of p values on (0, 1]")
    parser.add_argument("--out", type=str, default=None)
    args = parser.parse_args()

    threshold = solve_threshold(args.m)
    lines = ["p,value,stability,tangent"]
    for i in range(1, args.steps + 1):
        p = i / args.steps
        fps = find_fixed_points(ModelParams.symmetric(args.m, p))
        for fp in fps.points:
            lines.append(f"{p:.17g},{fp.value:.17g},{fp.stability},{int(fp.tangent)}")
    text = "\n".join(lines) + "\n"

    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.steps} p-values to {args.out}")
    else:
        sys.stdout.write(text)
    print(
        f"# m={args.m}: threshold p({args.m}) = {threshold.p_threshold:.9f}"
        f"{' (boundary)' if threshold.at_boundary else ''}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
