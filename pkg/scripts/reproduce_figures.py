"""Run every packaged recipe at its preset resolution and write the data sets.

usage: python3 scripts/reproduce_figures.py [OUT_DIR] [--only Fig4c Fig5e ...]
"""

import argparse
import sys
import time
from pathlib import Path

from qbattery.sweep.config import build_spec
from qbattery.sweep.recipes import Recipe
from qbattery.sweep.runner import run_sweep


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", nargs="?", default="figures", type=Path)
    ap.add_argument("--only", nargs="+", metavar="RECIPE")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    recipes = [r for r in Recipe if r is not Recipe.CUSTOM]
    if args.only:
        recipes = [Recipe(name) for name in args.only]
    for r in recipes:
        t0 = time.perf_counter()
        result = run_sweep(build_spec(r), args.out / r.value, workers=args.workers)
        counts = ", ".join(
            f"{tier}: " + " ".join(f"{k}={v}" for k, v in sorted(c.items()))
            for tier, c in result.manifest["status_counts"].items()
        )
        print(f"{r.value:7s} {time.perf_counter() - t0:7.1f}s  {counts}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
