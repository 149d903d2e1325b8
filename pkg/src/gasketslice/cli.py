"""Command-line interface.

Every computation in the library is reachable as a subcommand, with
machine-readable CSV or JSON output.  Result files carry a metadata header
(tool version, slope, depths, seed, wall time); identical configurations
with identical seeds produce identical files except for the wall-time field.

Exit codes: 0 success, 1 invalid arguments, 2 capacity exceeded,
3 invariant violation.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .errors import CapacityError, InvariantViolation, ValidationError
from .exact import SlopeSpec, make_slope, slope_from_gasket_tangent
from .matrices import (
    build_matrices_congruence,
    build_matrices_geometric,
    build_transition_pair,
    count_degenerate_words,
    degenerate_count_bound,
    find_primitive_word,
    validate_structure,
)
from .measures import LOG2, eta_weight_exact, perron_vector
from .exponents import (
    DEFAULT_EXACT_DEPTH,
    DEFAULT_MC_DEPTH,
    DEFAULT_MC_TRIALS,
    S_DIM,
    alpha_exact,
    alpha_monte_carlo,
    alpha_richardson,
    beta_exact,
    beta_monte_carlo,
    beta_richardson,
    growth_envelope,
)
from .pressure import (
    DEFAULT_PAIR,
    alpha_splice,
    envelope_cached,
    pressure_at,
    pressure_curve,
    pressure_derivative,
    spectrum_curve,
)
from .slicer import (
    conservation_check,
    conservation_envelope,
    expand_point,
    good_set_count_geometric,
    good_set_count_matrix,
    slice_dimension_estimate,
)

EXIT_OK = 0
EXIT_BAD_ARGS = 1
EXIT_CAPACITY = 2
EXIT_INVARIANT = 3


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on bad arguments; we need 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_ARGS)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_output(meta: Dict, columns: Sequence[str], rows: Sequence[Sequence],
                  fmt: str, out_path: Optional[str]) -> None:
    if fmt == "json":
        doc = {
            "meta": meta,
            "columns": list(columns),
            "rows": [list(r) for r in rows],
        }
        text = json.dumps(doc, sort_keys=True, indent=2, default=str) + "\n"
    else:
        buf = io.StringIO()
        for key in sorted(meta):
            buf.write(f"# {key}={_fmt(meta[key])}\n")
        buf.write(",".join(columns) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(x) for x in row) + "\n")
        text = buf.getvalue()
    if out_path is None:
        sys.stdout.write(text)
        return
    outdir = os.environ.get("GASKETSLICE_OUTDIR")
    if outdir and not os.path.isabs(out_path):
        out_path = os.path.join(outdir, out_path)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _slope_from_args(args) -> SlopeSpec:
    has_pq = args.p is not None or args.q is not None
    has_gasket = args.gasket_tan is not None
    if has_pq == has_gasket:
        raise ValidationError("give exactly one of --p/--q or --gasket-tan M N")
    if has_pq:
        if args.p is None or args.q is None:
            raise ValidationError("both --p and --q are required")
        return make_slope(args.p, args.q)
    m, n = args.gasket_tan
    return slope_from_gasket_tangent(m, n)


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse rational {text!r}") from exc


def _base_meta(args, slope: SlopeSpec, **extra) -> Dict:
    meta = {
        "tool": "gasketslice",
        "version": __version__,
        "backend": BACKEND,
        "command": args.command,
        "p": slope.p,
        "q": slope.q,
    }
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# Subcommand handlers (each returns meta, columns, rows)
# ---------------------------------------------------------------------------

def _cmd_matrices(args, slope):
    builder = build_matrices_geometric if args.builder == "geometric" else build_matrices_congruence
    tp = builder(slope)
    rows = []
    for name, A in (("A0", tp.A0), ("A1", tp.A1)):
        for i in range(tp.m):
            rows.append([name, i + 1] + [int(x) for x in A[i]])
    cols = ["matrix", "row"] + [f"c{j}" for j in range(1, tp.m + 1)]
    return _base_meta(args, slope, builder=args.builder), cols, rows


def _cmd_validate(args, slope):
    tp = build_transition_pair(slope)
    rep = validate_structure(tp)
    rows = [["ok", ""]] if rep.ok else [["failure", msg] for msg in rep.failures]
    meta = _base_meta(args, slope, ok=rep.ok)
    code = EXIT_OK if rep.ok else EXIT_INVARIANT
    return meta, ["status", "detail"], rows, code


def _cmd_primitive(args, slope):
    tp = build_transition_pair(slope)
    cert = find_primitive_word(tp)
    rows = [[
        "".join(map(str, cert.word)), cert.n0, cert.product_min_entry,
        tp.m * (tp.m - 1) + 1,
    ]]
    cols = ["word", "length", "product_min_entry", "length_bound"]
    meta = _base_meta(args, slope)
    if args.degenerate_n:
        cols += ["n", "degenerate_count", "degenerate_bound"]
        rows = []
        for n in range(1, args.degenerate_n + 1):
            rows.append([
                "".join(map(str, cert.word)), cert.n0, cert.product_min_entry,
                tp.m * (tp.m - 1) + 1,
                n, count_degenerate_words(tp, n), degenerate_count_bound(tp.m, n),
            ])
    return meta, cols, rows


def _estimate_rows(est, extra_cols=(), extra_vals=()):
    cols = ["mode", "n", "value", "stderr", "upper_bound", "nu_dim"]
    row = [est.mode, est.n, est.value,
           "" if est.stderr is None else est.stderr,
           "" if est.upper_bound is None else est.upper_bound,
           "" if est.nu_dim is None else est.nu_dim]
    return list(cols) + list(extra_cols), [row + list(extra_vals)]


def _cmd_alpha(args, slope):
    tp = build_transition_pair(slope)
    if args.mode == "exact":
        est = alpha_exact(tp, args.n or DEFAULT_EXACT_DEPTH)
    elif args.mode == "richardson":
        est = alpha_richardson(tp, (args.n or DEFAULT_EXACT_DEPTH) // 2)
    else:
        est = alpha_monte_carlo(tp, args.n or DEFAULT_MC_DEPTH, args.trials,
                                args.seed, threads=args.threads)
    cols, rows = _estimate_rows(est)
    meta = _base_meta(args, slope, mode=est.mode, n=est.n, seed=args.seed,
                      trials=args.trials, s_minus_1=S_DIM - 1)
    return meta, cols, rows


def _cmd_beta(args, slope):
    tp = build_transition_pair(slope)
    if args.mode == "exact":
        est = beta_exact(tp, args.n or DEFAULT_EXACT_DEPTH)
    elif args.mode == "richardson":
        est = beta_richardson(tp, (args.n or DEFAULT_EXACT_DEPTH) // 2)
    else:
        est = beta_monte_carlo(tp, args.n or DEFAULT_MC_DEPTH, args.trials,
                               args.seed, threads=args.threads)
    cols, rows = _estimate_rows(est)
    meta = _base_meta(args, slope, mode=est.mode, n=est.n, seed=args.seed,
                      trials=args.trials, s_minus_1=S_DIM - 1)
    return meta, cols, rows


def _cmd_envelope(args, slope):
    tp = build_transition_pair(slope)
    env = growth_envelope(tp, args.n or DEFAULT_EXACT_DEPTH)
    cols = ["n", "b_min_est", "b_max_est", "min_value", "max_value",
            "min_word", "max_word"]
    rows = [[env.n, env.b_min_est, env.b_max_est, env.min_value, env.max_value,
             "".join(map(str, env.min_word)), "".join(map(str, env.max_word))]]
    return _base_meta(args, slope, n=env.n), cols, rows


def _cmd_pressure(args, slope):
    tp = build_transition_pair(slope)
    n = args.n or DEFAULT_EXACT_DEPTH
    if args.t is not None:
        ts = [args.t]
    else:
        ts = list(np.linspace(args.t_min, args.t_max, args.t_points))
    curve = pressure_curve(tp, ts, n)
    rows = [[t, v, n_, kind] for (t, v, kind, n_) in curve.samples]
    meta = _base_meta(args, slope, n=n, s=S_DIM)
    if args.derivative:
        rows = [[t, pressure_derivative(tp, t, DEFAULT_PAIR), DEFAULT_PAIR[1],
                 "extrapolated"] for t in ts if t > 0]
        meta["derivative"] = True
        meta["pair"] = str(DEFAULT_PAIR)
    return meta, ["t", "value", "n", "bound_kind"], rows


def _cmd_spectrum(args, slope):
    tp = build_transition_pair(slope)
    grid = None
    if args.delta_min is not None and args.delta_max is not None:
        grid = np.linspace(args.delta_min, args.delta_max, args.points)
    curve = spectrum_curve(tp, args.kind, grid=grid, points=args.points,
                           env_depth=args.env_depth)
    rows = [[x, y, curve.meta["pair"][1], curve.meta["bound_kind"]]
            for (x, y) in curve.points]
    meta = _base_meta(
        args, slope, kind=args.kind, points=args.points,
        alpha_splice=curve.meta["alpha_splice"],
        b_min_est=curve.meta["b_min_est"], b_max_est=curve.meta["b_max_est"],
        env_depth=curve.meta["env_depth"], s=S_DIM,
    )
    return meta, ["delta", "value", "n", "bound_kind"], rows


def _parse_n_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad n list {text!r}") from exc


def _cmd_slice(args, slope):
    tp = build_transition_pair(slope)
    pv = perron_vector(tp)
    a = _parse_rational(args.a)
    ref = expand_point(slope, a)
    n_list = _parse_n_list(args.n_list)
    est = slice_dimension_estimate(ref, n_list, tp)
    rows = []
    for n, dim in est.points:
        cm = good_set_count_matrix(ref, n, tp)
        geo = ""
        if n <= 16:
            geo = good_set_count_geometric(slope, a, n).count
        cons = conservation_check(ref, n, tp, pv)
        rows.append([n, cm.count if cm.count is not None else "",
                     geo, dim, cons.local_dim, cons.deviation])
    meta = _base_meta(
        args, slope, a=str(a), k=ref.k,
        prefix="".join(map(str, ref.prefix)),
        period="".join(map(str, ref.period)),
        boundary=ref.boundary,
        liminf_proxy=est.liminf_proxy, limsup_proxy=est.limsup_proxy,
        periodic_limit=est.periodic_limit,
    )
    cols = ["n", "count_matrix", "count_geometric", "box_dim_n", "local_dim_n",
            "conservation_deviation"]
    return meta, cols, rows


def _cmd_conserve(args, slope):
    tp = build_transition_pair(slope)
    pv = perron_vector(tp)
    a = _parse_rational(args.a)
    ref = expand_point(slope, a)
    n = args.n or 32
    chk = conservation_check(ref, n, tp, pv)
    env = conservation_envelope(pv, tp.m, n)
    cols = ["n", "local_dim", "box_dim", "deviation", "envelope", "within_envelope"]
    within = abs(chk.deviation) <= env
    rows = [[n, chk.local_dim, chk.box_dim, chk.deviation, env, within]]
    meta = _base_meta(args, slope, a=str(a), k=ref.k)
    return meta, cols, rows, (EXIT_OK if within else EXIT_INVARIANT)


def _selftest_checks(seed: int):
    """Curated invariant suite; yields (name, ok, detail)."""
    import random as _random

    rnd = _random.Random(seed)
    golden_A0 = [[1, 0, 0, 0, 0], [0, 0, 1, 0, 0], [0, 1, 0, 0, 1],
                 [0, 1, 0, 1, 0], [0, 0, 0, 1, 0]]
    golden_A1 = [[0, 1, 0, 0, 0], [1, 0, 0, 1, 0], [1, 0, 1, 0, 0],
                 [0, 0, 1, 0, 1], [0, 0, 0, 0, 1]]
    tp23 = build_matrices_geometric(make_slope(2, 3))
    yield ("golden-5x5-matrices",
           tp23.A0.tolist() == golden_A0 and tp23.A1.tolist() == golden_A1, "")

    ok = True
    detail = ""
    for m in range(2, 10):
        for p in range(1, m):
            if math.gcd(p, m - p) != 1:
                continue
            sl = make_slope(p, m - p)
            geo = build_matrices_geometric(sl)
            cong = build_matrices_congruence(sl)
            if not (np.array_equal(geo.A0, cong.A0) and np.array_equal(geo.A1, cong.A1)):
                ok, detail = False, f"builders disagree at {p}/{m-p}"
            rep = validate_structure(geo)
            if not rep.ok:
                ok, detail = False, str(rep)
    yield ("builders-and-structure-p+q<=9", ok, detail)

    tp = build_transition_pair(make_slope(1, 1))
    pv = perron_vector(tp)
    total = sum(eta_weight_exact(tp, pv, tuple((w >> i) & 1 for i in range(8)))
                for w in range(256))
    yield ("eta-total-mass-n8", total == 1, f"sum={total}")

    v0, _ = pressure_at(tp, 0.0, 10)
    v1, _ = pressure_at(tp, 1.0, 10)
    yield ("pressure-anchor-t0", v0 == math.log(2), f"P(0)={v0!r}")
    yield ("pressure-anchor-t1",
           abs(v1 - math.log(3) - math.log(2) / 10) < 1e-12, f"P(1)={v1!r}")

    ok = True
    for t in np.linspace(-3, 3, 13):
        p6 = pressure_at(tp, float(t), 6)[0]
        p12 = pressure_at(tp, float(t), 12)[0]
        if t >= 0 and p12 > p6 + 1e-12:
            ok = False
        if t < 0 and p12 < p6 - 1e-12:
            ok = False
    yield ("pressure-bound-monotonicity", ok, "")

    ok = True
    slope = make_slope(1, 1)
    for _ in range(5):
        d = rnd.choice([101, 103, 107])
        a = Fraction(rnd.randrange(1, d), d) * 2 - 1  # in (-1, 1)
        ref = expand_point(slope, a)
        cm = good_set_count_matrix(ref, 8, tp).count
        cg = good_set_count_geometric(slope, a, 8).count
        if not (cm <= cg <= 3 * cm):
            ok = False
    yield ("good-set-sandwich", ok, "")

    ref = expand_point(slope, 1)
    chk = conservation_check(ref, 32, tp, pv)
    env = conservation_envelope(pv, tp.m, 32)
    yield ("conservation-envelope", abs(chk.deviation) <= env,
           f"dev={chk.deviation!r} env={env!r}")

    e1 = alpha_monte_carlo(tp, 200, 20, seed)
    e2 = alpha_monte_carlo(tp, 200, 20, seed)
    yield ("mc-determinism", e1.value == e2.value, "")


def _cmd_selftest(args, slope):
    rows = []
    failures = 0
    for name, ok, detail in _selftest_checks(args.seed):
        rows.append([name, "PASS" if ok else "FAIL", detail])
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail and not ok else ""))
        if not ok:
            failures += 1
    meta = _base_meta(args, slope, failures=failures, seed=args.seed)
    code = EXIT_OK if failures == 0 else EXIT_INVARIANT
    return meta, ["check", "status", "detail"], rows, code


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_slope_args(sp):
    sp.add_argument("--p", type=int, default=None, help="slope numerator")
    sp.add_argument("--q", type=int, default=None, help="slope denominator")
    sp.add_argument("--gasket-tan", nargs=2, type=int, metavar=("M", "N"),
                    default=None,
                    help="slope given as the equilateral-gasket tangent sqrt(3)*M/N")


def _add_io_args(sp):
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output", "-o", default=None,
                    help="output file (default stdout; relative paths resolve "
                         "against $GASKETSLICE_OUTDIR when set)")
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                    help="worker threads for Monte Carlo chunks (results are "
                         "identical for any value)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gasketslice",
                 description="Dimension theory of rational-slope slices of the "
                             "Sierpinski gasket, with finite-depth certificates.")
    ap.add_argument("--version", action="version", version=f"gasketslice {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("matrices", help="emit the transition matrices")
    sp.add_argument("--builder", choices=("geometric", "congruence"),
                    default="geometric")
    _add_slope_args(sp); _add_io_args(sp)
    sp.set_defaults(fn=_cmd_matrices)

    sp = sub.add_parser("validate", help="check the structural lemmas")
    _add_slope_args(sp); _add_io_args(sp)
    sp.set_defaults(fn=_cmd_validate)

    sp = sub.add_parser("primitive", help="find a primitive product word")
    sp.add_argument("--degenerate-n", type=int, default=0,
                    help="also count degenerate words for n=1..N")
    _add_slope_args(sp); _add_io_args(sp)
    sp.set_defaults(fn=_cmd_primitive)

    for name, fn in (("alpha", _cmd_alpha), ("beta", _cmd_beta)):
        sp = sub.add_parser(name, help=f"estimate the {name} exponent")
        sp.add_argument("--mode", choices=("exact", "mc", "richardson"),
                        default="exact")
        sp.add_argument("--n", type=int, default=None, help="depth")
        sp.add_argument("--trials", type=int, default=DEFAULT_MC_TRIALS)
        sp.add_argument("--seed", type=int, default=0)
        _add_slope_args(sp); _add_io_args(sp)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("envelope", help="extreme growth rates with witnesses")
    sp.add_argument("--n", type=int, default=None)
    _add_slope_args(sp); _add_io_args(sp)
    sp.set_defaults(fn=_cmd_envelope)

    sp = sub.add_parser("pressure", help="pressure function values or derivative")
    sp.add_argument("--t", type=float, default=None, help="single t")
    sp.add_argument("--t-min", type=float, default=-5.0)
    sp.add_argument("--t-max", type=float, default=5.0)
    sp.add_argument("--t-points", type=int, default=41)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--derivative", action="store_true",
                    help="emit dP/dt (extrapolated) instead of P_n")
    _add_slope_args(sp); _add_io_args(sp)
    sp.set_defaults(fn=_cmd_pressure)

    sp = sub.add_parser("spectrum", help="Legendre-transform spectra")
    sp.add_argument("--kind", choices=("gamma", "chi", "box", "localdim"),
                    default="gamma")
    sp.add_argument("--points", type=int, default=50)
    sp.add_argument("--delta-min", type=float, default=None)
    sp.add_argument("--delta-max", type=float, default=None)
    sp.add_argument("--env-depth", type=int, default=DEFAULT_EXACT_DEPTH)
    _add_slope_args(sp); _add_io_args(sp)
    sp.set_defaults(fn=_cmd_spectrum)

    sp = sub.add_parser("slice", help="per-point slice report")
    sp.add_argument("--a", required=True, help="offset, an exact rational like 1/3")
    sp.add_argument("--n-list", default="4,8,16,32",
                    help="comma-separated depths")
    _add_slope_args(sp); _add_io_args(sp)
    sp.set_defaults(fn=_cmd_slice)

    sp = sub.add_parser("conserve", help="dimension-conservation check at a point")
    sp.add_argument("--a", required=True)
    sp.add_argument("--n", type=int, default=32)
    _add_slope_args(sp); _add_io_args(sp)
    sp.set_defaults(fn=_cmd_conserve)

    sp = sub.add_parser("selftest", help="run the invariant suite")
    sp.add_argument("--seed", type=int, default=0)
    _add_slope_args(sp); _add_io_args(sp)
    sp.set_defaults(fn=_cmd_selftest)

    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "selftest" and args.p is None and args.gasket_tan is None:
            args.p, args.q = 1, 1  # the suite itself picks its slopes
        slope = _slope_from_args(args)
        t0 = time.perf_counter()
        result = args.fn(args, slope)
        meta, cols, rows = result[:3]
        code = result[3] if len(result) > 3 else EXIT_OK
        meta["wall_time_s"] = round(time.perf_counter() - t0, 6)
        _write_output(meta, cols, rows, args.format, args.output)
        if code == EXIT_INVARIANT:
            print("invariant violation: see report", file=sys.stderr)
        return code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_ARGS
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    raise SystemExit(main())
