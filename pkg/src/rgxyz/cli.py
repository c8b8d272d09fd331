"""Command line front end.

    rgxyz validate|solve|sweep|oracle <config> [--out PATH] [--format csv|json]
          [--seed N] [--tol-newton X] [--threads N]

Exit codes: 0 success, 1 validation failure, 2 solver failure, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import oracle, solver
from .config import ConfigError, bundled_config, load_config
from .model import check_constraints, evaluate_couplings
from .runner import emit, run_oracle_compare, run_solve, run_sweep

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3
CONSTRAINT_RTOL = 1e-12

log = logging.getLogger("rgxyz")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rgxyz", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=("validate", "solve", "sweep", "oracle"))
    ap.add_argument("config", help="config file, or the name of a bundled config (fig1_xxz, fig1_aniso)")
    ap.add_argument("--out", help="output path (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--tol-newton", type=float, dest="tol_newton")
    ap.add_argument("--threads", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _resolve(path: str) -> str:
    import os

    if os.path.exists(path):
        return path
    candidate = bundled_config(path)
    return str(candidate) if candidate.exists() else path


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(_resolve(args.config))
        cfg = cfg.with_overrides(format=args.format, seed=args.seed,
                                 newton_tol=args.tol_newton, threads=args.threads)
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    out = args.out or cfg.output

    try:
        if args.command == "validate":
            rep = check_constraints(evaluate_couplings(cfg.params))
            body = dict(L=cfg.L, field_relative=rep.field_relative,
                        cubic_relative=rep.cubic_relative, ok=rep.ok(CONSTRAINT_RTOL))
            _write(json.dumps(body, indent=1) + "\n", out)
            return EXIT_OK if body["ok"] else EXIT_VALIDATION
        if args.command == "oracle":
            try:
                rep = run_oracle_compare(cfg)
            except oracle.SystemTooLarge as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_VALIDATION
            _write(json.dumps(rep.as_dict(), indent=1) + "\n", out)
            for f in rep.failures:
                print(f"oracle mismatch: {f}", file=sys.stderr)
            return EXIT_OK if rep.passed else EXIT_SOLVER
        rows = run_solve(cfg) if args.command == "solve" else run_sweep(cfg)
        text = emit(rows, cfg.format, out)
        if out is None:
            sys.stdout.write(text)
        failed = sum(1 for r in rows if r["error"])
        if failed:
            print(f"warning: {failed} rows carry solver errors", file=sys.stderr)
            return EXIT_SOLVER
        return EXIT_OK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (solver.SolverError, oracle.DegenerateSpectrum) as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
