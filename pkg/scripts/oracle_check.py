"""Compare moment dynamics against the truncated Fock density matrix.

Prints, for random stable parameter sets, the worst mismatch ratio
|Fock - moments| / max(1e-3 |moments|, 1e-6); values below 1 agree.

usage: python3 scripts/oracle_check.py [--sets 20] [--levels 25]
"""

import argparse
import sys

import numpy as np

from qbattery import fock
from qbattery.sweep.verify import oracle_mismatch, oracle_sets


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="moment dynamics vs Fock oracle")
    ap.add_argument("--sets", type=int, default=20)
    ap.add_argument("--levels", type=int, default=25)
    ap.add_argument("--t-end", type=float, default=2.0)
    args = ap.parse_args(argv)
    cfg = fock.FockConfig.square(args.levels)
    times = np.linspace(0.1 * args.t_end, args.t_end, 10)
    worst = 0.0
    for k, p in enumerate(oracle_sets(args.sets)):
        r = oracle_mismatch(p, cfg, times)
        worst = max(worst, r)
        print(f"{k:3d} {p.drive_kind.value:9s} delta={p.delta:+.3f} g={p.g:.3f} omega={p.omega:.3f} "
              f"gamma_h={p.gamma_h:.3f}  ratio={r:.3g}", flush=True)  # fmt: skip
    print(f"worst ratio {worst:.3g} ({'agree' if worst <= 1 else 'DISAGREE'})")
    return 0 if worst <= 1 else 1


if __name__ == "__main__":
    sys.exit(main())
