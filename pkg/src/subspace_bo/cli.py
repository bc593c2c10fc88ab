"""Command-line entry point: ``subspace-bo {run,bounds,bench-info,validate}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .benchmarks import BenchmarkSpec, Family, make_benchmark, native_bounds
from .bounds import BoundParams, gamma_proxy
from .errors import InvalidArgumentError, InvalidConfigError
from .harness import emit_bounds, load_config, run_experiment

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subspace-bo", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a TOML config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--out", type=Path, default=None)

    b = sub.add_parser("bounds", help="export a cumulative-regret bound curve")
    b.add_argument("--D", dest="big_dim", type=int, required=True)
    b.add_argument("--d", dest="low_dim", type=int, required=True)
    b.add_argument("--alpha", type=int, default=0)
    b.add_argument("--n0", type=int, default=1)
    b.add_argument("--delta", type=float, default=0.1)
    b.add_argument("--T", dest="horizon", type=int, required=True)
    b.add_argument("--kernel", choices=["se", "matern"], default="matern")
    b.add_argument("--a", dest="a_const", type=float, default=1.0)
    b.add_argument("--b", dest="b_const", type=float, default=1.0)
    b.add_argument("--sigma2", type=float, default=1e-4)
    b.add_argument("--out", type=Path, required=True)

    sub.add_parser("bench-info", help="list benchmark families and their optima")
    sub.add_parser("validate", help="run the invariant self-test")
    return p


def _bench_info() -> None:
    print(f"{'family':<22}{'optimum (max)':>16}  native domain")
    for fam in Family:
        spec = BenchmarkSpec(fam, 2)
        obj = make_benchmark(spec)
        lo, hi = native_bounds(spec)
        dom = f"[{lo[0]:g}, {hi[0]:g}]"
        if fam is Family.CAMELBACK_AUGMENTED:
            dom = f"x1 in [{lo[0]:g}, {hi[0]:g}], x2 in [{lo[1]:g}, {hi[1]:g}], rest ignored"
        else:
            dom += "^D"
        print(f"{fam.value:<22}{obj.known_optimum:>16.10g}  {dom}")


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    try:
        if args.command == "run":
            cfg, raw = load_config(args.config)
            if args.workers is not None:
                if args.workers < 1:
                    raise InvalidConfigError("--workers must be >= 1")
                cfg = replace(cfg, parallel_workers=args.workers)
            if args.out is not None:
                cfg = replace(cfg, output_dir=args.out)
            summary = run_experiment(cfg, raw)
            print(summary)
        elif args.command == "bounds":
            params = BoundParams(
                big_dim=args.big_dim, low_dim=args.low_dim, n0=args.n0, alpha=args.alpha,
                delta=args.delta, a_const=args.a_const, b_const=args.b_const,
                gamma=gamma_proxy(args.kernel, args.big_dim), sigma2=args.sigma2,
            )
            print(emit_bounds(params, args.horizon, args.out))
        elif args.command == "bench-info":
            _bench_info()
        elif args.command == "validate":
            from .validate import run_checks

            return EXIT_OK if run_checks() else EXIT_RUNTIME
    except (InvalidConfigError, InvalidArgumentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
