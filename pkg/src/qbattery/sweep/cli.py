"""Command line entry point: ``qbattery sweep|verify|recipes``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from ..errors import BatteryError, InvalidParams, OutputError, ParseError, ValidationError
from ..fock import FockConfig
from .config import parse_config
from .recipes import describe
from .runner import MOMENT_TOL, run_sweep
from .verify import CRITERIA, verify_suite

OUT_ENV = "QBATTERY_OUT"


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return n


def _positive_float(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("expected a positive number")
    return x


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qbattery", description="driven-dissipative quantum battery sweeps and checks")
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run a sweep config and write CSV/JSON datasets")
    sw.add_argument("config", type=Path, help="config file ('-' reads stdin)")
    sw.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV} or ./sweep-out)")
    sw.add_argument("--workers", type=_positive_int, default=1, help="parallel worker processes")
    sw.add_argument("--tol", type=_positive_float, default=MOMENT_TOL, help="moment ODE tolerance")
    sw.add_argument("--fock-n", type=int, default=None, help="Fock truncation for both modes")

    ve = sub.add_parser("verify", help="run the acceptance battery and print a pass/fail table")
    ve.add_argument("--tol", type=_positive_float, default=None, help="override every numeric limit")
    ve.add_argument("--only", type=int, nargs="+", choices=sorted(CRITERIA), help="run a subset of criteria")
    ve.add_argument("--out", type=Path, default=None, help="also write the report to this directory")

    sub.add_parser("recipes", help="list the figure presets")
    return ap


def _sweep(args) -> int:
    text = sys.stdin.read() if str(args.config) == "-" else args.config.read_text(encoding="utf-8")
    spec = parse_config(text)
    if args.fock_n is not None:
        rwa = spec.fock.rwa if spec.fock is not None else True
        try:
            spec = dataclasses.replace(spec, fock=FockConfig.square(args.fock_n, rwa))
        except InvalidParams as exc:
            raise ValidationError(str(exc)) from exc
    result = run_sweep(spec, args.out, workers=args.workers, tol=args.tol)
    counts = result.manifest["status_counts"]
    for name in result.files:
        print(name)
    for tier, c in counts.items():
        print(f"{tier}: " + ", ".join(f"{k}={v}" for k, v in sorted(c.items())))
    return 0


def _verify(args) -> int:
    report = verify_suite(only=args.only, tol=args.tol, progress=lambda n: print(f"running C{n:02d}", file=sys.stderr))
    text = report.text()
    sys.stdout.write(text)
    if args.out is not None:
        try:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "verify.txt").write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OutputError(str(exc)) from exc
    return 0 if report.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "recipes":
            for name, provenance in describe():
                print(f"{name:8s} {provenance}")
            return 0
        if args.command == "sweep":
            return _sweep(args)
        return _verify(args)
    except (ParseError, ValidationError) as exc:
        print(f"qbattery: invalid config: {exc}", file=sys.stderr)
        return 2
    except (OutputError, OSError) as exc:
        print(f"qbattery: output error: {exc}", file=sys.stderr)
        return 3
    except BatteryError as exc:
        print(f"qbattery: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
