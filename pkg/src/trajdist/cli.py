"""Command-line entry point: distances, curve generation and the scaling benchmark.

Every command prints one JSON document on stdout.  Exit status is 0 on
success, 1 for bad input or usage, 2 when an internal consistency check fails.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .dtw_approx import approx_dtw
from .ed_approx import approx_ed
from .errors import TrajdistError
from .exact_dp import exact_dfr, exact_dtw, exact_ed
from .frechet import dfr_2approx
from .geometry import CurveFamilyParams, Family, check_pair, gen_curve
from .io import parse_trajectory, write_trajectory

__all__ = ["RunReport", "main", "bench_rows", "bench_report", "log_slope"]

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


@dataclass
class RunReport:
    value: float
    lower_bound: float | None
    upper_bound: float | None
    mode: str
    eps: float | None
    g: float | None
    num_rects: int | None
    boundary_points: int | None
    union_boundary_points: int | None
    pairing_calls: int | None
    elapsed_ms: float
    n: int
    m: int
    d: int
    exact_value: float | None = None
    observed_ratio: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))


def _ratio(value, exact):
    if exact == 0:
        return 1.0 if value == 0 else None
    return value / exact


def _report(res, P, Q, eps, g, t0) -> RunReport:
    st = res.stats
    lo = hi = None
    if res.bounds is not None:
        lo, hi = res.bounds.lower, res.bounds.upper
    elif res.mode == "exact":
        lo = hi = res.value
    return RunReport(
        value=res.value, lower_bound=lo, upper_bound=hi, mode=str(res.mode.value), eps=eps, g=g,
        num_rects=st.get("num_rects"), boundary_points=st.get("boundary_points"),
        union_boundary_points=st.get("union_boundary_points") if g is not None else None,
        pairing_calls=st.get("pairing_calls"), elapsed_ms=(time.perf_counter() - t0) * 1e3,
        n=len(Q), m=len(P), d=P.shape[1],
    )


def _load_pair(args):
    P = parse_trajectory(args.a, args.format)
    Q = parse_trajectory(args.b, args.format)
    return check_pair(P, Q)


def cmd_dtw(args) -> RunReport:
    P, Q = _load_pair(args)
    t0 = time.perf_counter()
    rep = _report(approx_dtw(P, Q, args.eps), P, Q, args.eps, None, t0)
    if args.exact:
        rep.exact_value = exact_dtw(P, Q).value
        rep.observed_ratio = _ratio(rep.value, rep.exact_value)
    return rep


def cmd_ed(args) -> RunReport:
    P, Q = _load_pair(args)
    t0 = time.perf_counter()
    rep = _report(approx_ed(P, Q, args.g, args.eps), P, Q, args.eps, args.g, t0)
    if args.exact:
        rep.exact_value = exact_ed(P, Q, args.g).value
        rep.observed_ratio = _ratio(rep.value, rep.exact_value)
    return rep


def cmd_dfr(args) -> RunReport:
    P, Q = _load_pair(args)
    t0 = time.perf_counter()
    value = dfr_2approx(P, Q)
    # the estimate lies in [dfr, 2 dfr]
    rep = RunReport(value=value, lower_bound=value / 2, upper_bound=value, mode="approx", eps=None, g=None,
                    num_rects=None, boundary_points=None, union_boundary_points=None, pairing_calls=None,
                    elapsed_ms=(time.perf_counter() - t0) * 1e3, n=len(Q), m=len(P), d=P.shape[1])
    if args.exact:
        rep.exact_value = exact_dfr(P, Q)
        rep.observed_ratio = _ratio(rep.value, rep.exact_value)
    return rep


def _family_params(args, seed) -> CurveFamilyParams:
    kw = dict(family=Family.parse(args.family), seed=seed, dim=args.dim)
    if args.kappa is not None:
        kw["kappa"] = args.kappa
    if args.c1 is not None:
        kw["c1"] = args.c1
    if args.c2 is not None:
        kw["c2"] = args.c2
    return CurveFamilyParams(**kw)


def cmd_gen(args) -> dict:
    params = _family_params(args, args.seed)
    pts = gen_curve(params, args.n)
    write_trajectory(args.output, pts, args.format)
    return {"path": args.output, "family": params.family.value, "n": int(len(pts)), "d": int(pts.shape[1]),
            "seed": args.seed}


# ----------------------------------------------------------------------------
# benchmark


def _bench_one(task):
    params_p, params_q, n, eps, g, with_exact = task
    P = gen_curve(params_p, n)
    Q = gen_curve(params_q, n)
    t0 = time.perf_counter()
    r = approx_dtw(P, Q, eps)
    t1 = time.perf_counter()
    e = approx_ed(P, Q, g, eps)
    t2 = time.perf_counter()
    row = {
        "n": n,
        "boundary_points": r.stats["boundary_points"],
        "union_boundary_points": e.stats["union_boundary_points"],
        "num_rects": r.stats["num_rects"],
        "mode": r.mode.value,
        "value": r.value,
        "elapsed_ms": (t1 - t0) * 1e3,
        "ed_value": e.value,
        "ed_elapsed_ms": (t2 - t1) * 1e3,
        "exact_value": None,
        "exact_ms": None,
    }
    if with_exact:
        t3 = time.perf_counter()
        row["exact_value"] = exact_dtw(P, Q).value
        row["exact_ms"] = (time.perf_counter() - t3) * 1e3
    return row


def _workers() -> int:
    cap = os.environ.get("TRAJDIST_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            raise TrajdistError(f"TRAJDIST_THREADS must be an integer, got {cap!r}") from None
    return os.cpu_count() or 1


def bench_rows(params: CurveFamilyParams, sizes, eps: float, g: float = 1.0, with_exact: bool = True,
               workers: int | None = None) -> list[dict]:
    """One row per size on a pair of independent curves (seeds s and s+1)."""
    q_params = CurveFamilyParams(params.family, params.kappa, params.c1, params.c2, params.seed + 1, params.dim)
    tasks = [(params, q_params, int(n), eps, g, with_exact) for n in sizes]
    workers = _workers() if workers is None else workers
    if workers <= 1 or len(tasks) == 1:
        return [_bench_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(_bench_one, tasks))


def log_slope(xs, ys) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


def bench_report(params, sizes, eps, g=1.0, with_exact=True, workers=None) -> dict:
    rows = bench_rows(params, sizes, eps, g, with_exact, workers)
    ns = [r["n"] for r in rows]
    out = {"family": params.family.value, "kappa": params.kappa, "seed": params.seed, "eps": eps, "g": g,
           "rows": rows, "slope_boundary": None, "slope_union_boundary": None}
    if len(rows) >= 2:
        out["slope_boundary"] = log_slope(ns, [r["boundary_points"] for r in rows])
        out["slope_union_boundary"] = log_slope(ns, [r["union_boundary_points"] for r in rows])
    return out


def cmd_bench(args) -> dict:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise TrajdistError(f"bad --sizes {args.sizes!r}") from None
    if not sizes or min(sizes) < 2:
        raise TrajdistError("--sizes needs integers >= 2")
    if args.kappa is None:
        args.kappa = 4.0
    params = _family_params(args, args.seed)
    report = bench_report(params, sizes, args.eps, args.g, not args.no_exact)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(report, fh, indent=1)
    return report


# ----------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="trajdist", description="Approximate DTW, edit and discrete Frechet distances.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pair_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("a", help="first trajectory (CSV or JSON)")
        p.add_argument("b", help="second trajectory (CSV or JSON)")
        p.add_argument("--format", choices=["csv", "json"], help="override the format implied by the extension")
        p.add_argument("--exact", action="store_true", help="also compute the exact value and observed ratio")
        return p

    p = pair_cmd("dtw", "dynamic time warping")
    p.add_argument("--eps", type=_positive, required=True)
    p = pair_cmd("ed", "edit distance with gap penalty")
    p.add_argument("--g", type=_positive, required=True)
    p.add_argument("--eps", type=_positive, required=True)
    pair_cmd("dfr", "discrete Frechet distance (2-approximation)")

    def family_args(p):
        p.add_argument("--family", required=True, help="kappa-packed, kappa-bounded or backbone")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--kappa", type=_positive)
        p.add_argument("--c1", type=_positive)
        p.add_argument("--c2", type=_positive)
        p.add_argument("--dim", type=int, default=2)

    p = sub.add_parser("gen", help="generate a curve")
    family_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("bench", help="boundary growth and timing over sizes")
    family_args(p)
    p.add_argument("--eps", type=_positive, required=True)
    p.add_argument("--g", type=_positive, default=1.0, help="gap penalty for the union-boundary count")
    p.add_argument("--sizes", required=True, help="comma-separated sizes, e.g. 512,1024,2048")
    p.add_argument("--no-exact", action="store_true", help="skip the exact DP timing")
    p.add_argument("-o", "--output")
    return ap


COMMANDS = {"dtw": cmd_dtw, "ed": cmd_ed, "dfr": cmd_dfr, "gen": cmd_gen, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = COMMANDS[args.command](args)
    except AssertionError as exc:
        print(f"trajdist: internal check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (TrajdistError, ValueError, OSError) as exc:
        print(f"trajdist: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(out.to_json() if isinstance(out, RunReport) else json.dumps(out, allow_nan=False))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
