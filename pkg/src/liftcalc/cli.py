"""Command line: ``liftcalc validate | suite | flow``.

Exit codes: 0 when every check passes, 1 when a check fails (or a flow
diverges), 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import yaml

from . import sampling
from .dsl.errors import DimensionMismatch, DslError, SchemaError
from .dsl.model import load_model
from .jet import primal
from .lifts import flow_linearity_defect
from .smooth import ConfigurationError, DivergenceError, flow_rk4
from .suites import SUITES, run_suite, run_validation


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liftcalc", description="Residual checks for lifts on Lie algebroids and pair Poisson groupoids.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="algebroid axioms and Jacobi identities of a model (or a directory of models)")
    v.add_argument("path")
    v.add_argument("--points", type=_positive_int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=_positive_float, default=None)
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--no-timing", action="store_true", help="omit wall times so reports are byte-identical across runs")

    s = sub.add_parser("suite", help="run an identity battery")
    s.add_argument("name", choices=SUITES)
    s.add_argument("path")
    s.add_argument("--points", type=_positive_int, default=30)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=_positive_float, default=None, help="override every residual tolerance")
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--no-timing", action="store_true", help="omit wall times so reports are byte-identical across runs")

    f = sub.add_parser("flow", help="integrate a named vector field and report fiber-linearity of the flow")
    f.add_argument("path")
    f.add_argument("field")
    f.add_argument("--t", type=float, required=True)
    f.add_argument("--steps", type=_positive_int, required=True)
    f.add_argument("--points", type=_positive_int, default=4)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--format", choices=("text", "json"), default="text")
    return p


def _emit(report, fmt: str, timing: bool) -> int:
    if fmt == "json":
        print(report.to_json(timing))
    else:
        print(report.to_text(timing))
    return 0 if report.passed else 1


def _fmt(values) -> str:
    return "(" + ", ".join(f"{float(np.ravel(primal(v))[0]):.12g}" for v in values) + ")"


def cmd_flow(args) -> int:
    model = load_model(args.path)
    if args.field not in model.vector_fields:
        known = ", ".join(sorted(model.vector_fields)) or "none"
        raise UsageError(f"unknown vector field {args.field!r} (model declares: {known})")
    X = model.vector_fields[args.field]
    n, k = model.n, model.k
    gen = sampling.rng(args.seed)
    base = sampling.points(gen, n, args.points)
    out: dict = {"field": args.field, "t": args.t, "steps": args.steps}
    try:
        if X.dim == n:
            end = flow_rk4(X, base, args.t, args.steps)
            out.update(start=[float(c[0]) for c in base], endpoint=[float(np.ravel(primal(c))[0]) for c in end])
            lines = [f"flow of {args.field} on the base: {_fmt(base)} -> {_fmt(end)}"]
        else:
            v = sampling.points(gen, k, args.points)
            w = sampling.points(gen, k, args.points)
            res = flow_linearity_defect(X, n, k, base, v, w, args.t, args.steps)
            start = list(base) + list(v)
            kind = "linear" if res["offset"] < 1e-9 else "affine, not linear (zero section moves)"
            out.update(
                start=[float(c[0]) for c in start],
                endpoint=[float(np.ravel(primal(c))[0]) for c in res["endpoint"]],
                defect=res["defect"],
                offset=res["offset"],
                kind=kind if res["defect"] < 1e-6 else "not fiber-affine",
            )
            lines = [
                f"flow of {args.field} on the total space: {_fmt(start)} -> {_fmt(res['endpoint'])}",
                f"fiber-linearity defect {res['defect']:.3e} over {args.points} base points; zero-section offset {res['offset']:.3e}",
                f"flow map is {out['kind']}",
            ]
    except DivergenceError as exc:
        out["diverged_at_step"] = exc.step
        lines = [f"flow of {args.field} diverged at step {exc.step} of {args.steps}"]
        code = 1
    else:
        code = 0
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        print("\n".join(lines))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with exit status 2
        return int(exc.code or 0)
    try:
        if args.command == "validate":
            report = run_validation(args.path, points=args.points, seed=args.seed, tol=args.tol)
            return _emit(report, args.format, not args.no_timing)
        if args.command == "suite":
            report = run_suite(args.name, args.path, points=args.points, seed=args.seed, tol=args.tol)
            return _emit(report, args.format, not args.no_timing)
        return cmd_flow(args)
    except OSError as exc:
        print(f"liftcalc: cannot read {getattr(exc, 'filename', '') or args.path}: {exc.strerror or exc}", file=sys.stderr)
    except (DslError, SchemaError, DimensionMismatch, yaml.YAMLError) as exc:
        print(f"liftcalc: {args.path}: {exc}", file=sys.stderr)
    except (UsageError, ConfigurationError) as exc:
        print(f"liftcalc: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
