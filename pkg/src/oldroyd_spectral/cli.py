"""Command line entry point: run, sweep-dispersion, verify, resume."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import OUTPUT_ENV, ConfigError, load_config, parse_overrides
from .integrate import EXIT_CONFIG, EXIT_OK, resume_run, run
from .linear import damping_sweep, log_samples, write_sweep_csv

EXIT_VERIFY_FAILED = 1


def _parser():
    p = argparse.ArgumentParser(prog="oldroyd", description="Pseudospectral compressible Oldroyd-B toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate a configuration")
    r.add_argument("config")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")

    s = sub.add_parser("sweep-dispersion", help="eigenvalues of the linearized mode matrix over |xi|")
    s.add_argument("--n", type=int, choices=(2, 3), required=True)
    s.add_argument("--ximin", type=float, default=2.0**-6)
    s.add_argument("--ximax", type=float, default=2.0**6)
    s.add_argument("--samples", type=int, default=64)
    s.add_argument("--out", default=None, help="CSV path (default: <output dir>/damping_sweep.csv)")

    v = sub.add_parser("verify", help="run the harmonic-analysis property suite")
    v.add_argument("--samples", type=int, default=100)

    c = sub.add_parser("resume", help="continue a run from a checkpoint")
    c.add_argument("checkpoint")
    c.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return p


def _report(result):
    print(f"{result.status}: {result.message}")
    ledger = result.summary.get("ledger")
    if ledger:
        print(f"C_emp = {ledger['c_emp']:.6g}, lambda >= 2 C_emp: {ledger['lambda_ge_2c_emp']}")
    return result.exit_code


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            cfg = load_config(args.config, parse_overrides(args.set))
            return _report(run(cfg))
        if args.command == "resume":
            return _report(resume_run(args.checkpoint, parse_overrides(args.set)))
        if args.command == "sweep-dispersion":
            if not (0 < args.ximin < args.ximax) or args.samples < 2:
                raise ConfigError(["need 0 < ximin < ximax and samples >= 2"])
            rows = damping_sweep(args.n, log_samples(args.ximin, args.ximax, args.samples))
            out = args.out or os.path.join(os.environ.get(OUTPUT_ENV) or "output", "damping_sweep.csv")
            os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
            write_sweep_csv(rows, out)
            flagged = sum(r.flagged for r in rows)
            print(f"wrote {out}: max Re lambda = {max(r.max_real for r in rows):.3e}, {flagged} flagged")
            return EXIT_OK
        if args.command == "verify":
            from .verification import run_suite

            results = run_suite(args.samples)
            for res in results:
                print(res.line())
            return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY_FAILED
    except ConfigError as e:
        print(e, file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as e:
        if args.command in ("run", "resume"):
            print(f"config error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        raise
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
