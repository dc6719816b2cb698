"""Command-line entry point ``earcg``.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 internal fault.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..errors import ConfigError
from .config import load_config
from .experiment import run_experiment
from .models import describe_models
from .summary import format_summary

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="earcg", description="Energy-adaptive RCG experiments")
    ap.add_argument("--list-models", action="store_true", help="list built-in models and exit")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run one or more experiment configs")
    run.add_argument("configs", nargs="+", type=Path)
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--solvers", type=str, default=None, help="comma-separated solver filter")
    run.add_argument("--jobs", type=int, default=1, help="experiments to run in parallel")
    run.add_argument("--quiet", action="store_true", help="do not print summaries")
    sub.add_parser("list-models", help="list built-in models")
    return ap


def _run_one(path: Path, out, seed, solvers) -> tuple[int, str]:
    try:
        cfg = load_config(path)
        res = run_experiment(cfg, out, seed=seed, solvers=solvers)
        return EXIT_OK, f"== {path} -> {res.out_dir}\n" + format_summary(res.summary)
    except ConfigError as exc:
        return EXIT_CONFIG, f"{path}: configuration error: {exc}"
    except OSError as exc:
        return EXIT_IO, f"{path}: I/O error: {exc}"
    except Exception as exc:  # noqa: BLE001
        return EXIT_INTERNAL, f"{path}: internal error: {type(exc).__name__}: {exc}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    if args.list_models or args.command == "list-models":
        print(describe_models())
        return EXIT_OK
    if args.command != "run":
        build_parser().print_help()
        return EXIT_CONFIG
    if args.jobs < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()] if args.solvers else None

    jobs = []
    for path in args.configs:
        out = args.out
        if out is not None and len(args.configs) > 1:
            out = out / path.stem
        jobs.append((path, out, args.seed, solvers))

    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, *zip(*jobs)))
    else:
        results = [_run_one(*j) for j in jobs]

    code = EXIT_OK
    for rc, text in results:
        stream = sys.stdout if rc == EXIT_OK else sys.stderr
        if rc != EXIT_OK or not args.quiet:
            print(text, file=stream)
        code = max(code, rc)
    return code


if __name__ == "__main__":
    sys.exit(main())
