"""Command-line front end: scans, point queries, lemma and regroup checks,
ladder studies, and the wide-cone counterexample, with CSV/JSON reports.

Exit codes: 0 on success/pass, 1 when a gated check fails, 2 on usage
errors (including library precondition violations, which are diagnosed
before any computation).  All randomness derives from --seed, and numbers
are emitted with 17 significant digits, so identical invocations produce
byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .cone import (
    DecompositionParams,
    RadialInterval,
    SECTOR_BOUND_ENLARGED,
    STANDARD,
    ENLARGED,
    eps_neighborhood,
)
from .errors import ConeOverlapError
from .experiments import (
    CounterexampleSpec,
    LadderSpec,
    counterexample_study,
    epsilon_study,
    uniformity_study,
)
from .lemma_checks import (
    DEFAULT_LEDGER,
    check_ball_separation,
    check_cos_bounds,
    check_diam_bound,
    check_lemma_3_1,
    check_lemma_3_2,
    check_lemma_3_3,
    check_lemma_3_4,
    check_quadratic_gap,
    check_regroup_4_3,
    check_regroup_4_4,
    check_regroup_4_5,
    check_slice_rectangle,
    RegroupParams,
)
from .minkowski import SearchBudget
from .overlap import default_prefilter_width, fiber, overlap_count, scan_points


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def emit_report(rows: list[dict], fmt: str, path: str | None) -> None:
    """Write rows as CSV (header + rows, newline-terminated) or JSON."""
    if fmt == "csv":
        if rows:
            header = list(rows[0].keys())
            lines = [",".join(header)]
            lines += [",".join(_fmt(r[k]) for k in header) for r in rows]
        else:
            lines = [""]
        text = "\n".join(lines) + "\n"
    else:
        payload = [
            {k: (int(v) if isinstance(v, bool) else v) for k, v in r.items()}
            for r in rows
        ]
        text = json.dumps(payload, indent=1) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _threads() -> int:
    raw = os.environ.get("OVERLAP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConeOverlapError(f"OVERLAP_THREADS must be an integer; got {raw!r}")
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def _budget(args) -> SearchBudget:
    return SearchBudget(
        max_boxes=args.max_boxes,
        min_box_width=args.min_box_width,
    )


def _intervals(args, delta: float) -> tuple[RadialInterval, RadialInterval]:
    width = getattr(args, "j_width", None)
    return (
        RadialInterval.pinned(args.j1, delta, width),
        RadialInterval.pinned(args.j2, delta, width),
    )


def _variant(args):
    kind = getattr(args, "variant", "standard")
    if kind == "standard":
        return STANDARD
    if kind == "enlarged":
        return ENLARGED
    if args.epsilon is None:
        raise ConeOverlapError("--epsilon is required for the eps variant")
    return eps_neighborhood(args.epsilon)


def _params(args, delta: float, variant) -> DecompositionParams:
    bound = SECTOR_BOUND_ENLARGED if variant.kind == "enlarged" else math.pi / 8.0
    return DecompositionParams(delta, bound)


def _cmd_scan(args) -> int:
    variant = _variant(args)
    params = _params(args, args.delta, variant)
    j1, j2 = _intervals(args, args.delta)
    budget = _budget(args)
    width = default_prefilter_width(params, j1, j2, variant, seed=args.seed)
    points = scan_points(params, j1, j2, variant, args.points, args.seed)
    rows = []
    max_cert = max_unk = 0
    total_unknown = total_tested = 0
    for i, p in enumerate(points):
        c = overlap_count(
            p, params, j1, j2, variant=variant, budget=budget,
            prefilter_width=width,
        )
        max_cert = max(max_cert, c.certified_in)
        max_unk = max(max_unk, c.certified_in + c.unknown)
        total_unknown += c.unknown
        total_tested += c.pairs_tested
        rows.append(
            {
                "delta": args.delta,
                "point_id": i,
                "xi1": p.x1,
                "xi2": p.x2,
                "eta": p.eta,
                "certified_in": c.certified_in,
                "unknown": c.unknown,
                "pairs_tested": c.pairs_tested,
            }
        )
    emit_report(rows, args.format, args.out)
    frac = total_unknown / total_tested if total_tested else 0.0
    print(
        f"scan delta={args.delta:g}: max_certified={max_cert} "
        f"max_with_unknown={max_unk} unknown_fraction={frac:.6f}",
        file=sys.stderr,
    )
    return 0


def _cmd_point(args) -> int:
    variant = _variant(args)
    params = _params(args, args.delta, variant)
    j1, j2 = _intervals(args, args.delta)
    from .geom import Point3

    c = overlap_count(
        Point3(args.xi1, args.xi2, args.eta),
        params, j1, j2, variant=variant, budget=_budget(args),
    )
    rows = [
        {
            "delta": args.delta,
            "xi1": args.xi1,
            "xi2": args.xi2,
            "eta": args.eta,
            "certified_in": c.certified_in,
            "unknown": c.unknown,
            "pairs_tested": c.pairs_tested,
            "pairs_prefiltered": c.pairs_prefiltered,
        }
    ]
    emit_report(rows, args.format, args.out)
    return 0


def _cmd_fiber(args) -> int:
    params = DecompositionParams(args.delta)
    fib = fiber(args.a, params)
    rows = [{"a": fib.a, "mu": mu, "nu": nu} for mu, nu in fib.pairs]
    emit_report(rows, args.format, args.out)
    return 0


def _cmd_lemma(args) -> int:
    led = DEFAULT_LEDGER
    delta = args.delta
    rows: list[dict] = []
    passed = True
    which = args.which
    if which == "cos":
        params = DecompositionParams(delta)
        bound = args.ell_max if args.ell_max is not None else params.max_index
        r = check_cos_bounds(bound, args.m_max if args.m_max is not None else bound, delta)
        passed = r.passed
        rows = [
            {
                "which": "cos",
                "delta": delta,
                "cells": r.cells,
                "max_violation": r.max_violation,
                "passed": r.passed,
            }
        ]
    elif which == "diam":
        params = DecompositionParams(delta)
        j1, j2 = _intervals(args, delta)
        r = check_diam_bound(params, j1, j2, args.ell, args.m, args.samples, args.seed)
        passed = r.passed
        rows = [
            {
                "which": "diam",
                "delta": delta,
                "ell": args.ell,
                "m": args.m,
                "spread": r.spread,
                "bound": r.bound,
                "passed": r.passed,
            }
        ]
    elif which == "quad":
        m = check_quadratic_gap(args.ell)
        rows = [{"which": "quad", "ell": args.ell, "largest_m": m, "passed": True}]
    elif which == "slice":
        params = DecompositionParams(delta)
        j1, j2 = _intervals(args, delta)
        eta = args.eta if args.eta is not None else j1.alpha + j2.alpha + math.sqrt(delta)
        eta_p = args.eta_p if args.eta_p is not None else eta / 2.0
        eta_pp = eta - eta_p
        r = check_slice_rectangle(
            params, args.a, args.ell, j1, j2, eta_p, eta_pp,
            args.c1 if args.c1 is not None else led.c1,
            args.c2 if args.c2 is not None else led.c2,
            args.samples, args.seed,
        )
        passed = r.passed
        rows = [
            {
                "which": "slice",
                "delta": delta,
                "a": args.a,
                "ell": args.ell,
                "c1_tight": r.c1_tight,
                "c2_tight": r.c2_tight,
                "passed": r.passed,
            }
        ]
    elif which == "3.1":
        b1 = args.b1 if args.b1 is not None else led.b1
        j1, j2 = _intervals(args, delta)
        eta = args.eta if args.eta is not None else j1.alpha + j2.alpha + math.sqrt(delta)
        eta_p = args.eta_p if args.eta_p is not None else eta / 2.0
        eta_pp = eta - eta_p
        r = check_lemma_3_1(b1, args.ell, delta, eta_p, eta_pp, args.samples)
        passed = r.passed
        rows = [
            {
                "which": "3.1",
                "delta": delta,
                "ell": args.ell,
                "b1": b1,
                "b2": r.b2,
                "b3": r.b3,
                "passed": r.passed,
            }
        ]
    elif which == "3.2":
        c1 = args.c1 if args.c1 is not None else led.c1
        c2 = args.c2 if args.c2 is not None else led.c2
        r = check_lemma_3_2(c1, c2, delta, args.grid)
        passed = r.passed
        rows = [
            {
                "which": "3.2",
                "delta": delta,
                "c1": c1,
                "c2": c2,
                "c0_prime": r.c0_prime,
                "c3_measured": r.c3_measured,
                "c4_measured": r.c4_measured,
                "cells": r.cells,
                "passed": r.passed,
            }
        ]
    elif which == "3.3":
        params = DecompositionParams(delta)
        j1, j2 = _intervals(args, delta)
        r = check_lemma_3_3(
            params, args.a, args.ell, j1, j2, args.samples, args.seed,
            args.c1, args.c2,
        )
        passed = r.passed
        rows = [
            {
                "which": "3.3",
                "delta": delta,
                "a": args.a,
                "ell": args.ell,
                "c1p_tight": r.c1_tight,
                "c2p_tight": r.c2_tight,
                "points": r.points,
                "passed": r.passed,
            }
        ]
    elif which == "3.4":
        params = DecompositionParams(delta)
        j1, j2 = _intervals(args, delta)
        eta = args.eta if args.eta is not None else j1.alpha + j2.alpha + math.sqrt(delta)
        a0 = check_lemma_3_4(params, eta, args.samples, args.seed, j1, j2)
        rows = [{"which": "3.4", "delta": delta, "eta": eta, "a0": a0, "passed": True}]
    elif which == "ball":
        params = DecompositionParams(delta)
        j1, j2 = _intervals(args, delta)
        eta = args.eta if args.eta is not None else j1.alpha + j2.alpha + math.sqrt(delta)
        c3 = args.c3 if args.c3 is not None else led.c3
        a0 = check_ball_separation(params, eta, args.ell, c3, j1, j2)
        rows = [
            {
                "which": "ball",
                "delta": delta,
                "eta": eta,
                "ell": args.ell,
                "c3": c3,
                "a0": a0,
                "passed": True,
            }
        ]
    else:
        raise ConeOverlapError(f"unknown lemma check {which!r}")
    emit_report(rows, args.format, args.out)
    return 0 if passed else 1


def _cmd_regroup(args) -> int:
    delta, epsilon = args.delta, args.epsilon
    rp = RegroupParams.of(delta, epsilon)
    rows = []
    passed = True
    which = args.which
    if which in ("4.3", "all"):
        ok = check_regroup_4_3(delta, epsilon)
        passed &= ok
        rows.append(
            {
                "which": "4.3",
                "delta": delta,
                "epsilon": epsilon,
                "n": rp.n,
                "delta_eps": rp.delta_eps,
                "passed": ok,
            }
        )
    if which in ("4.4", "all"):
        mu = args.mu if args.mu is not None else 0
        j1, _ = _intervals(args, delta)
        r = check_regroup_4_4(delta, epsilon, mu, j1, args.samples, args.seed)
        passed &= r.passed
        rows.append(
            {
                "which": "4.4",
                "delta": delta,
                "epsilon": epsilon,
                "n": rp.n,
                "delta_eps": rp.delta_eps,
                "mu": mu,
                "samples": r.samples,
                "membership_violations": r.membership_violations,
                "angle_violations": r.angle_violations,
                "passed": r.passed,
            }
        )
    if which in ("4.5", "all"):
        r = check_regroup_4_5(delta, epsilon)
        passed &= r.passed
        rows.append(
            {
                "which": "4.5",
                "delta": delta,
                "epsilon": epsilon,
                "n": rp.n,
                "delta_eps": rp.delta_eps,
                "failures": len(r.failures),
                "passed": r.passed,
            }
        )
    emit_report(rows, args.format, args.out)
    return 0 if passed else 1


def _cmd_uniformity(args) -> int:
    spec = LadderSpec(tuple(args.deltas), n_points=args.points, seed=args.seed)
    res = uniformity_study(spec, args.j1, args.j2, budget=_budget(args), threads=_threads())
    emit_report(list(res.rows), args.format, args.out)
    return 0 if res.passed else 1


def _cmd_epsilon_scan(args) -> int:
    spec = LadderSpec(
        tuple(args.deltas), n_points=args.points, seed=args.seed, epsilon=args.epsilon
    )
    res = epsilon_study(spec, args.j1, args.j2, budget=_budget(args), threads=_threads())
    emit_report(list(res.rows), args.format, args.out)
    return 0 if res.passed else 1


def _cmd_counterexample(args) -> int:
    spec = CounterexampleSpec(a_angle=args.a, b=args.b, taus=tuple(args.taus))
    res = counterexample_study(spec, seed=args.seed, subsample=args.subsample)
    emit_report(list(res.rows), args.format, args.out)
    return 0 if res.passed else 1


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated float list; got {text!r}")


def _add_common(p: argparse.ArgumentParser, *, budget: bool = True) -> None:
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    if budget:
        p.add_argument("--max-boxes", type=int, default=100_000,
                       help="branch-and-bound box budget per membership test")
        p.add_argument("--min-box-width", type=float, default=None,
                       help="scaled box width below which boxes stop splitting (default 1e-4*delta)")


def _add_j(p: argparse.ArgumentParser) -> None:
    p.add_argument("--j1", type=float, default=1.3,
                   help="left endpoint of the first radial interval")
    p.add_argument("--j2", type=float, default=1.3,
                   help="left endpoint of the second radial interval")
    p.add_argument("--j-width", type=float, default=None,
                   help="radial interval width (default sqrt(delta); must be <= sqrt(delta))")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="coneoverlap",
        description="Certified overlap verification for the decomposed cone "
        "neighborhood; CSV schemas are documented in docs/formats.md.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="witness-biased overlap scan, one CSV row per point")
    p.add_argument("--delta", type=float, required=True)
    _add_j(p)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--variant", choices=("standard", "enlarged", "eps"), default="standard")
    p.add_argument("--epsilon", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("point", help="overlap count at one explicit point")
    p.add_argument("--delta", type=float, required=True)
    _add_j(p)
    p.add_argument("--xi1", type=float, required=True)
    p.add_argument("--xi2", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--variant", choices=("standard", "enlarged", "eps"), default="standard")
    p.add_argument("--epsilon", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_point)

    p = sub.add_parser("fiber", help="list the index pairs of one class")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--a", type=float, required=True, help="half-integer class index")
    _add_common(p, budget=False)
    p.set_defaults(func=_cmd_fiber)

    p = sub.add_parser("lemma", help="run one quantitative check")
    p.add_argument("which", choices=("cos", "diam", "quad", "slice", "3.1", "3.2", "3.3", "3.4", "ball"))
    p.add_argument("--delta", type=float, default=1e-4)
    _add_j(p)
    p.add_argument("--ell", type=float, default=0.0)
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--c1", type=float, default=None)
    p.add_argument("--c2", type=float, default=None)
    p.add_argument("--b1", type=float, default=None)
    p.add_argument("--c3", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--eta-p", type=float, default=None)
    p.add_argument("--ell-max", type=float, default=None)
    p.add_argument("--m-max", type=float, default=None)
    p.add_argument("--grid", type=int, default=5)
    p.add_argument("--samples", type=int, default=2000)
    _add_common(p, budget=False)
    p.set_defaults(func=_cmd_lemma)

    p = sub.add_parser("regroup", help="sector regrouping checks")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--which", choices=("4.3", "4.4", "4.5", "all"), default="all")
    p.add_argument("--mu", type=int, default=None)
    _add_j(p)
    p.add_argument("--samples", type=int, default=10_000)
    _add_common(p, budget=False)
    p.set_defaults(func=_cmd_regroup)

    p = sub.add_parser("uniformity", help="overlap uniformity down a delta ladder")
    p.add_argument("--deltas", type=_float_list, default=[1e-2, 2.5e-3, 6.25e-4])
    _add_j(p)
    p.add_argument("--points", type=int, default=200)
    _add_common(p)
    p.set_defaults(func=_cmd_uniformity)

    p = sub.add_parser("epsilon-scan", help="eps-neighborhood scaling down a ladder")
    p.add_argument("--deltas", type=_float_list, default=[1e-2, 1e-3, 1e-4])
    p.add_argument("--epsilon", type=float, required=True)
    _add_j(p)
    p.add_argument("--points", type=int, default=100)
    _add_common(p)
    p.set_defaults(func=_cmd_epsilon_scan)

    p = sub.add_parser("counterexample", help="wide-cone growth study")
    p.add_argument("--a", type=float, default=0.75 * math.pi,
                   help="sector bound in (pi/2, pi)")
    p.add_argument("--b", type=float, default=1.3)
    p.add_argument("--taus", type=_float_list, default=[1e4, 4e4, 1.6e5])
    p.add_argument("--subsample", type=int, default=100)
    _add_common(p, budget=False)
    p.set_defaults(func=_cmd_counterexample)

    return ap


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConeOverlapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
