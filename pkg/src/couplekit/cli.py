"""Command-line front end.

Exit codes: 0 success, 1 property failure, 2 input error, 3 compute error,
4 unsupported operation.  ``COUPLEKIT_THREADS`` caps the worker threads
used for grids of ``t``.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .couple import INF
from .exceptions import ConvergenceError, PreconditionError, UnsupportedOperationError
from .interp import KMethodParams, k_space_norm, lorentz_k_equiv
from .io import CoupleFileError, couple_hash, load_couple_file, write_curve_csv, write_matrix
from .kfun import decreasing_rearrangement, k_curve, k_functional, k_values
from .orbit import OrbitProblem, best_decomposition, dominates, hlp_certificate, hlp_construct
from .structure import SubcoupleSpec, dual_ball_sup, is_b_subcouple

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_INPUT = 2
EXIT_COMPUTE = 3
EXIT_UNSUPPORTED = 4

SUITES = ("norms", "duality", "subcouple", "fundamental-lemma", "interp")


class InputError(Exception):
    pass


def _fmt_p(p):
    return "inf" if math.isinf(p) else repr(float(p))


def _parse_p(text):
    if text.strip().lower() == "inf":
        return INF
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid exponent {text!r}") from None
    if not p >= 1:
        raise argparse.ArgumentTypeError("p must lie in [1, inf]")
    return p


def _load(path, element=None):
    couple, elements = load_couple_file(path)
    if element is None:
        return couple, elements
    if element not in elements:
        raise InputError(f"element {element!r} not found in {path}")
    return couple, elements[element]


# k-curve


def cmd_k_curve(args, out):
    couple, a = _load(args.couple_file, args.element)
    if not (args.t_min > 0 and args.t_max > 0):
        raise InputError("t must be positive")
    if args.t_min >= args.t_max:
        raise InputError("--t-min must be smaller than --t-max")
    meta = {
        "couple_sha256": couple_hash(couple),
        "element": args.element,
        "kind": "K",
        "p": _fmt_p(args.p),
    }
    if args.exact:
        if args.p == 1 and couple.is_piecewise_linear:
            curve = k_curve(couple, a)
            meta.update(
                representation="breakpoints",
                left_value=repr(curve.left_value),
                initial_slope=repr(curve.initial_slope),
                terminal_slope=repr(curve.terminal_slope),
            )
            write_curve_csv(out, curve.breakpoints, curve.values, meta)
            return EXIT_OK
        print("no closed form for this couple; writing sampled values", file=sys.stderr)
    ts = np.geomspace(args.t_min, args.t_max, args.points)
    vals = k_values(couple, a, ts, args.p)
    meta["representation"] = "sampled"
    write_curve_csv(out, ts, vals, meta)
    return EXIT_OK


# orbit


def cmd_orbit(args, out):
    A, a = _load(args.file_a, args.element_a)
    B, b = _load(args.file_b, args.element_b)
    if args.construct and not (A.is_l1_linf and B.is_l1_linf):
        print("construction not supported for this couple", file=sys.stderr)
        return EXIT_UNSUPPORTED
    dom = dominates(OrbitProblem(A, B, a, b))
    if not dom.holds:
        out.write(f"VIOLATED witness t={dom.witness_t!r}\n")
        return EXIT_OK
    kind = "exact" if dom.exact else "sampled"
    out.write(f"DOMINATES margin={dom.margin!r} ({kind} comparison)\n")
    if args.construct:
        T = hlp_construct(a, b)
        cert = hlp_certificate(T, a, b)
        for key, val in cert.items():
            out.write(f"# {key}: {val!r}\n")
        if args.matrix_out:
            with open(args.matrix_out, "w", encoding="utf-8") as fh:
                write_matrix(fh, T.matrix)
        else:
            write_matrix(out, T.matrix)
    return EXIT_OK


# report suites


def _report_samples(couple, elements, rng, count=4):
    named = list(elements.items())
    if named:
        return named
    return [(f"random{i}", rng.normal(size=couple.n)) for i in range(count)]


def _suite_norms(couple, samples, rng):
    rows = []
    for name, a in samples:
        b = rng.normal(size=couple.n)
        ok = True
        details = {}
        for t in (0.25, 1.0, 4.0):
            k_inf = k_functional(couple, a, t, INF)[0]
            k_2 = k_functional(couple, a, t, 2)[0]
            k_1 = k_functional(couple, a, t, 1)[0]
            slack = 1e-9 * max(k_1, 1e-300)
            chain = k_inf <= k_2 + slack and k_2 <= k_1 + slack and k_1 <= 2 * k_inf + slack
            tri = k_functional(couple, a + b, t, 1)[0] <= k_1 + k_functional(couple, b, t, 1)[0] + slack
            hom = abs(k_functional(couple, -3 * a, t, 1)[0] - 3 * k_1) <= 1e-8 * max(k_1, 1e-300)
            ok = ok and chain and tri and hom
            details[f"t={t}"] = {"K_inf": k_inf, "K_2": k_2, "K_1": k_1}
        rows.append({"element": name, "pass": ok, **details})
    return rows


def _suite_duality(couple, samples, rng):
    rows = []
    for name, a in samples:
        k_inf = k_functional(couple, a, 1.0, INF)[0]
        dual = dual_ball_sup(couple, a, 1.0)[0]
        ok = abs(k_inf - dual) <= 1e-6 * max(abs(k_inf), 1e-12)
        rows.append({"element": name, "t": 1.0, "K_inf": k_inf, "dual_sup": dual, "pass": ok})
    return rows


def _suite_subcouple(couple, samples, rng):
    rows = []
    for i in range(couple.n):
        spec = SubcoupleSpec(couple, keep=(i,))
        res = is_b_subcouple(spec, seed=int(rng.integers(2**31)))
        rows.append({"subcouple": f"keep={i}", "b_subcouple": bool(res.holds), "pass": True})
    if couple.n >= 2:
        v = np.zeros(couple.n)
        v[:2] = (2.0, 1.0)
        spec = SubcoupleSpec(couple, basis=[v])
        res = is_b_subcouple(spec, seed=int(rng.integers(2**31)))
        witness = None if res.witness is None else res.witness[1]
        rows.append(
            {"subcouple": "span(2,1,0..)", "b_subcouple": bool(res.holds),
             "witness_t": witness, "pass": True}
        )
    return rows


def _suite_fundamental(couple, samples, rng):
    rows = []
    for name, a in samples:
        if not np.any(a):
            continue
        d = best_decomposition(couple, a)
        err = float(np.max(np.abs(d.recompose() - a)))
        sigma = k_functional(couple, a, 1.0, 1)[0]
        ok = err <= 1e-8 * sigma and d.c_meas <= 4.0
        rows.append(
            {"element": name, "levels": [d.levels[0], d.levels[-1]], "c_meas": d.c_meas,
             "recomposition_error": err, "pass": ok}
        )
    if rows:
        rows.append({"gamma_estimate": max(r["c_meas"] for r in rows), "pass": True})
    return rows


def _suite_interp(couple, samples, rng):
    rows = []
    for name, a in samples:
        norms = {}
        for theta in (0.25, 0.5, 0.75):
            for q in (1.0, 2.0, INF):
                norms[f"theta={theta},q={_fmt_p(q)}"] = k_space_norm(
                    couple, a, KMethodParams(theta, q)
                )
        b = decreasing_rearrangement(a)
        ratios = {}
        ok = True
        for p0 in (1.0, 2.0):
            res = lorentz_k_equiv(p0, INF, b, check=False)
            ratios[f"p0={p0}"] = [res.min_ratio, res.max_ratio]
            ok = ok and res.within_window
        rows.append({"element": name, "norms": norms, "lorentz_ratios": ratios, "pass": ok})
    return rows


_SUITE_FUNCS = {
    "norms": _suite_norms,
    "duality": _suite_duality,
    "subcouple": _suite_subcouple,
    "fundamental-lemma": _suite_fundamental,
    "interp": _suite_interp,
}


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _text_row(row):
    parts = []
    for key, val in row.items():
        if key == "pass":
            continue
        if isinstance(val, float):
            parts.append(f"{key}={val:.10g}")
        else:
            parts.append(f"{key}={val}")
    status = "PASS" if row.get("pass", True) else "FAIL"
    return f"{status} " + " ".join(parts)


def cmd_report(args, out):
    couple, elements = _load(args.couple_file)
    if args.element is not None:
        if args.element not in elements:
            raise InputError(f"element {args.element!r} not found")
        elements = {args.element: elements[args.element]}
    rng = np.random.default_rng(args.seed)
    samples = _report_samples(couple, elements, rng)
    rows = _SUITE_FUNCS[args.suite](couple, samples, rng)
    all_pass = all(r.get("pass", True) for r in rows)
    if args.json:
        doc = {"suite": args.suite, "seed": args.seed, "couple_sha256": couple_hash(couple),
               "pass": all_pass, "rows": rows}
        out.write(json.dumps(doc, indent=2, default=_jsonable) + "\n")
    else:
        out.write(f"# suite: {args.suite}\n# seed: {args.seed}\n")
        for row in rows:
            out.write(_text_row(row) + "\n")
        out.write(("PASS" if all_pass else "FAIL") + "\n")
    return EXIT_OK if all_pass else EXIT_PROPERTY


def build_parser():
    parser = argparse.ArgumentParser(prog="couplekit", description="K-functionals of finite Banach couples")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    kc = sub.add_parser("k-curve", help="export t -> K(t, a) as CSV")
    kc.add_argument("couple_file")
    kc.add_argument("element")
    kc.add_argument("--p", type=_parse_p, default=1.0)
    kc.add_argument("--t-min", type=float, default=2.0**-6)
    kc.add_argument("--t-max", type=float, default=2.0**6)
    grid = kc.add_mutually_exclusive_group()
    grid.add_argument("--points", type=int, default=25)
    grid.add_argument("--exact", action="store_true")
    kc.add_argument("-o", "--output")
    kc.set_defaults(func=cmd_k_curve)

    ob = sub.add_parser("orbit", help="test K(t, b) <= K(t, a) and optionally build T")
    ob.add_argument("file_a")
    ob.add_argument("element_a")
    ob.add_argument("file_b")
    ob.add_argument("element_b")
    ob.add_argument("--construct", action="store_true")
    ob.add_argument("--matrix-out")
    ob.add_argument("-o", "--output")
    ob.set_defaults(func=cmd_orbit)

    rp = sub.add_parser("report", help="run a property suite on a couple file")
    rp.add_argument("couple_file")
    rp.add_argument("--suite", required=True)
    rp.add_argument("--element")
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--json", action="store_true")
    rp.add_argument("-o", "--output")
    rp.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses status 2 for usage errors, matching EXIT_INPUT
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    if getattr(args, "suite", None) is not None and args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_INPUT
    points = getattr(args, "points", None)
    if points is not None and points < 2:
        print("--points must be at least 2", file=sys.stderr)
        return EXIT_INPUT
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        return args.func(args, out)
    except (CoupleFileError, InputError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UnsupportedOperationError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ConvergenceError, PreconditionError, ArithmeticError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
