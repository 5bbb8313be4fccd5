"""Command line interface: ``convridge {predict,simulate,sweep,verify}``.

Exit status is 0 on success, 1 when a verification check fails and 2 for an
invalid configuration.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    DEFAULT_DELTAS,
    DEFAULT_LAMBDAS,
    PRESETS,
    SweepSpec,
    csv_text,
    emit_csv,
    emit_svg,
    preset,
    run_sweep,
    theory_rows,
    verify,
)
from .signal_model import ConfigError, ModelConfig, load_config, process_from_config

EXIT_OK, EXIT_CHECK_FAILED, EXIT_BAD_CONFIG = 0, 1, 2


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value config file")
    common.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
    common.add_argument("--trials", type=int, help="Monte-Carlo trials per cell")
    common.add_argument("--out", type=Path, help="output directory (default: print CSV)")
    common.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    common.add_argument("--svg", action="store_true", help="also write an SVG plot")
    common.add_argument("--deltas", type=_float_list, help="comma-separated delta grid")
    common.add_argument("--lambdas", type=_float_list, help="comma-separated lambda grid")
    common.add_argument("--workers", type=int, default=1, help="threads for trials")

    parser = argparse.ArgumentParser(
        prog="convridge",
        description="Ridge deconvolution: asymptotic theory versus Monte-Carlo simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("predict", parents=[common], help="theory only")
    sub.add_parser("simulate", parents=[common], help="Monte-Carlo only")
    sub.add_parser("sweep", parents=[common], help="theory and Monte-Carlo")
    v = sub.add_parser("verify", help="run the cross-module oracle checks")
    v.add_argument("--seed", type=_u64, default=20240601)
    return parser


def spec_from_args(args) -> SweepSpec:
    """Merge preset, config file and flags (in increasing precedence)."""
    spec = preset(
        args.preset,
        deltas=args.deltas or DEFAULT_DELTAS,
        lambdas=args.lambdas or DEFAULT_LAMBDAS,
    )
    values = load_config(args.config) if args.config else {}
    base = spec.base
    T = values.get("T", base.T)
    base = ModelConfig(
        n_x=values.get("n_x", 1),
        n_y=values.get("n_y", base.n_y),
        T=T,
        k=values.get("k", T if "T" in values else base.k),
        sigma2=values.get("sigma2", base.sigma2),
        sigmaK2=values.get("sigmaK2", base.sigmaK2),
        lam=values.get("lambda", 0.0),
    )
    lambdas = spec.lambda_grid
    if "lambda" in values and not args.lambdas:
        lambdas = (values["lambda"],)
    deltas = spec.delta_grid
    if "n_x" in values and not args.deltas:
        deltas = (base.n_y / values["n_x"],)
    trials = args.trials if args.trials is not None else values.get("trials", spec.trials)
    seed = args.seed if args.seed is not None else values.get("seed", spec.seed)
    try:
        return SweepSpec(
            base=base,
            delta_grid=tuple(deltas),
            lambda_grid=tuple(lambdas),
            trials=trials,
            seed=seed,
            process=process_from_config(values, spec.process),
            workers=max(1, args.workers),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        checks = verify(seed=args.seed)
        failed = [c for c in checks if not c.passed]
        print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
        return EXIT_CHECK_FAILED if failed else EXIT_OK

    try:
        spec = spec_from_args(args)
    except ConfigError as exc:
        print(f"convridge: bad config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    def progress(msg):
        print(msg, file=sys.stderr)

    if args.command == "predict":
        rows = theory_rows(spec)
    else:
        rows = run_sweep(spec, with_theory=args.command == "sweep", progress=progress)

    if args.out is None:
        sys.stdout.write(csv_text(rows))
        return EXIT_OK
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        path = emit_csv(rows, args.out / f"{args.command}.csv")
        print(f"wrote {path}", file=sys.stderr)
        if args.svg:
            path = emit_svg(rows, args.out / f"{args.command}.svg")
            print(f"wrote {path}", file=sys.stderr)
    except OSError as exc:
        print(f"convridge: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
