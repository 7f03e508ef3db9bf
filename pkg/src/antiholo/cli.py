"""Command-line front end.

Exit codes: 0 clean run, 1 usage or input error, 2 a point returned
VIOLATION for the constant-curvature implication.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .exprlang import ExprDomainError, ExprError
from .manifold import ManifoldError, catalog_manifold, load_manifold
from .planes import DEFAULT_RESTARTS, PlaneError, extremize_antiholomorphic
from .report import write_report
from .tensorcalc import curvature_package
from .verify import _classify_pkg, property_suite, scan_manifold

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None


def _manifold(args):
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read spec file: {exc}") from None
        return load_manifold(text)
    if not args.catalog:
        raise UsageError("one of --catalog or --spec is required")
    params = _floats(args.params or "", "--params")
    return catalog_manifold(args.catalog, params)


def _add_source(p: argparse.ArgumentParser, allow_spec: bool = True):
    if allow_spec:
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--catalog", help="flat | fubini_study | hopf | twisted_j")
        src.add_argument("--spec", help="manifold spec file (antiholo-spec v1)")
    else:
        p.add_argument("--catalog", required=True, help="flat | fubini_study | hopf | twisted_j")
        p.set_defaults(spec=None)
    p.add_argument("--params", default="", help="comma-separated catalog parameters, e.g. 3,4")


def _fmt(x) -> str:
    return f"{x: .6e}"


def cmd_analyze(args, out) -> int:
    M = _manifold(args)
    rep = scan_manifold(M, args.points, args.seed)
    print(f"antiholo {__version__}  manifold={rep.manifold} params={rep.params} "
          f"points={rep.sampler} seed={rep.seed}", file=out)
    header = f"{'#':>3}  {'class':<22} {'nu_hat':>14} {'max_dev':>14} {'residual25':>14}  {'theorem_a':<16}"
    print(header, file=out)
    print("-" * len(header), file=out)
    for i, d in enumerate(rep.points):
        print(f"{i:>3}  {d.point_class.value:<22} {_fmt(d.nu_hat):>14} {_fmt(d.max_dev):>14} "
              f"{_fmt(d.residual25):>14}  {d.theorem_a.value:<16}", file=out)
    s = rep.summary
    print("-" * len(header), file=out)
    print(f"nu_hat spread {_fmt(s['nu_hat_spread'])}  pointwise_constant={s['pointwise_constant']}  "
          f"constant_across_points={s['constant_across_points']}  violation={s['violation']}", file=out)
    if args.json:
        write_report(rep, args.json)
        print(f"report written to {args.json}", file=out)
    return EXIT_VIOLATION if s["violation"] == "YES" else EXIT_OK


def _point(args, M) -> np.ndarray:
    p = np.array(_floats(args.point, "--point"))
    if p.size != M.dim:
        raise UsageError(f"--point needs {M.dim} coordinates, got {p.size}")
    return M.check_point(p)


def cmd_checks(args, out) -> int:
    M = _manifold(args)
    p = _point(args, M)
    rows = property_suite(M, p, args.seed)
    cls = _classify_pkg(curvature_package(M, p))
    print(f"{M.name} {list(M.params)} at {tuple(float(x) for x in p)}: class {cls.point_class.value}", file=out)
    header = f"{'check':<24} {'residual':>14} {'tol':>10}  {'verdict':<8} kind"
    print(header, file=out)
    print("-" * len(header), file=out)
    for r in rows:
        margin = ""
        if r.verdict == "FAIL":
            margin = f"  margin {r.residual - r.tol:.3e}"
        print(f"{r.name:<24} {_fmt(r.residual):>14} {r.tol:>10.1e}  {r.verdict:<8} {r.kind}{margin}", file=out)
    return EXIT_OK


def cmd_extremize(args, out) -> int:
    M = _manifold(args)
    p = _point(args, M)
    pkg = curvature_package(M, p, with_nabla_riemann=False)
    res = extremize_antiholomorphic(pkg.riemann_frame, pkg.g_frame, pkg.J_frame,
                                    restarts=args.restarts, seed=args.seed)
    vec = lambda v: "[" + ", ".join(f"{x: .6f}" for x in v) + "]"  # noqa: E731
    print(f"{M.name} {list(M.params)} at {tuple(float(x) for x in p)} (adapted-frame components)", file=out)
    print(f"K_min {res.k_min: .12f}", file=out)
    print(f"  X = {vec(res.argmin.X)}", file=out)
    print(f"  Y = {vec(res.argmin.Y)}", file=out)
    print(f"K_max {res.k_max: .12f}", file=out)
    print(f"  X = {vec(res.argmax.X)}", file=out)
    print(f"  Y = {vec(res.argmax.Y)}", file=out)
    print(f"gap   {res.k_max - res.k_min: .12e}", file=out)
    print(f"iterations (min) {res.iterations_min}", file=out)
    print(f"iterations (max) {res.iterations_max}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="antiholo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"antiholo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="scan a manifold and report per-point diagnostics")
    _add_source(a)
    a.add_argument("--points", default="random:5", help="grid:N or random:K (default random:5)")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--json", help="write the JSON report to this path")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("checks", help="property-suite residual table at one point")
    _add_source(c)
    c.add_argument("--point", required=True, help="comma-separated coordinates x1,...,x2n")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_checks)

    e = sub.add_parser("extremize", help="min/max antiholomorphic sectional curvature at one point")
    _add_source(e)
    e.add_argument("--point", required=True, help="comma-separated coordinates x1,...,x2n")
    e.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_extremize)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if getattr(args, "restarts", 1) < 1:
            raise UsageError("--restarts must be >= 1")
        return args.func(args, out)
    except (UsageError, ManifoldError, ExprError, ExprDomainError, PlaneError, ValueError, OSError) as exc:
        print(f"antiholo: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
