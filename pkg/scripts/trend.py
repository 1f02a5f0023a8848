#!/usr/bin/env python3
"""Measure single-thread engine runtimes on array-vs-diagonal multiplier
miters over a width range and print a CSV row per (width, engine).

The CDCL column is the one that grows steeply with width; ES and BDD
stay flat far longer.  Used to sanity-check a new machine before
trusting the shipped runtime-trend expectations.
"""

import argparse
import csv
import sys
import time

from cecprove.bdd import bdd_check
from cecprove.cnf import tseitin
from cecprove.es import es_check
from cecprove.miter import gen_multiplier_miter
from cecprove.sat import solve_cdcl
from cecprove.sweep import SubMiter


def as_sm(xag):
    return SubMiter(circuit=xag, origin=(0, 0), merged_history={},
                    pi_map=tuple(range(1, xag.num_pis + 1)), id=0)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-width", type=int, default=8)
    ap.add_argument("--max-width", type=int, default=12)
    ap.add_argument("--budget", type=float, default=10800.0,
                    help="per-solve cap in seconds (default 10800)")
    ap.add_argument("--engines", default="cdcl,es,bdd")
    args = ap.parse_args()
    engines = args.engines.split(",")

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["width", "engine", "verdict", "seconds"])
    for n in range(args.min_width, args.max_width + 1):
        m = gen_multiplier_miter(n, "array", "diagonal")
        for engine in engines:
            t0 = time.monotonic()
            if engine == "cdcl":
                verdict = solve_cdcl(tseitin(m), budget=args.budget).verdict
            elif engine == "es":
                verdict = es_check(as_sm(m), workers=1, budget=args.budget).verdict
            elif engine == "bdd":
                verdict = bdd_check(as_sm(m), budget=args.budget).verdict
            else:
                ap.error(f"unknown engine {engine!r}")
            out.writerow([n, engine, verdict, f"{time.monotonic() - t0:.2f}"])
            sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
