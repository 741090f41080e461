"""Command line interface: measures, Klain values, density extraction and check suites."""
from __future__ import annotations

import argparse
import inspect
import json
import sys
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .convex import Frame, MaxAffine, Quadratic, SmoothConvex, exp_linear, polytope_from_dict, smooth_sum, softmax_smoothing, support_function
from .forms import ConstantForm
from .maops import extract_density, hessian_measure, klain, ma_c2, ma_pl, ma_valuation, mixed_ma, psi_tau
from .measures import Box, RadonMeasure
from .minors import hessian_form, principal_minor_form
from .report import default_seed
from .suites import SUITES


class InputError(Exception):
    pass


def parse_function(data: Mapping[str, Any]):
    """Build a convex function from its JSON description.

    Accepted shapes: {"pieces": [...]}, {"vertices": [...], "shift": [...]},
    {"A": [[...]], "c": [...], "d": f}, {"softmax": {"pieces": [...], "beta": f}},
    {"exp_linear": [...]}, {"sum": [desc, ...]}.
    """
    if not isinstance(data, Mapping):
        raise InputError("function JSON must be an object")
    if "pieces" in data:
        return MaxAffine.from_dict(data)
    if "vertices" in data:
        return support_function(polytope_from_dict(data), data.get("shift"))
    if "A" in data:
        return Quadratic.from_dict(data)
    if "softmax" in data:
        desc = data["softmax"]
        return softmax_smoothing(MaxAffine.from_dict(desc), float(desc["beta"]))
    if "exp_linear" in data:
        return exp_linear(np.asarray(data["exp_linear"], dtype=float))
    if "sum" in data:
        parts = [parse_function(p) for p in data["sum"]]
        if all(isinstance(p, MaxAffine) for p in parts):
            out = parts[0]
            for p in parts[1:]:
                out = out + p
            return out
        if all(isinstance(p, SmoothConvex) for p in parts):
            return smooth_sum(parts)
        raise InputError("cannot add max-affine and smooth functions")
    raise InputError("unrecognized function description")


def _load_json(path: str | None) -> Any:
    if path is None:
        raise InputError("this command needs --json-in")
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except FileNotFoundError as exc:
        raise InputError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def _emit(payload: Any, args) -> None:
    text = json.dumps(payload, indent=2)
    if args.json_out:
        Path(args.json_out).write_text(text + "\n")
    print(text)


def _box(args, n: int) -> Box:
    return Box.cube(n, args.box)


def _measure_payload(m: RadonMeasure, args) -> dict:
    if args.tolerance is not None:
        keep = np.abs(m.masses) > args.tolerance
        m = RadonMeasure(m.n, m.atoms[keep], m.masses[keep], m.densities)
    out = m.to_dict()
    out["total_mass"] = {"re": m.total_mass.real, "im": m.total_mass.imag}
    return out


def _load_form(path: str | None) -> ConstantForm:
    if path is None:
        raise InputError("this command needs --form")
    try:
        return ConstantForm.from_dict(_load_json(path))
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad form JSON: {exc}") from exc


def cmd_ma(args) -> int:
    f = parse_function(_load_json(args.json_in))
    box = _box(args, f.n)
    m = ma_pl(f, box) if isinstance(f, MaxAffine) else ma_c2(f, box, args.grid)
    _emit(_measure_payload(m, args), args)
    return 0


def cmd_mixed_ma(args) -> int:
    data = _load_json(args.json_in)
    descs = data.get("functions") if isinstance(data, Mapping) else data
    if not isinstance(descs, list) or not descs:
        raise InputError("mixed-ma needs a list of functions")
    fs = [parse_function(s) for s in descs]
    _emit(_measure_payload(mixed_ma(fs, _box(args, fs[0].n), args.grid), args), args)
    return 0


def cmd_hessian(args) -> int:
    f = parse_function(_load_json(args.json_in))
    if args.k is None:
        raise InputError("hessian needs --k")
    if isinstance(f, MaxAffine):
        raise InputError("hessian measures need a smooth function")
    _emit(_measure_payload(hessian_measure(args.k, f, _box(args, f.n), args.grid), args), args)
    return 0


def cmd_psi_tau(args) -> int:
    tau = _load_form(args.form)
    f = parse_function(_load_json(args.json_in))
    if isinstance(f, MaxAffine):
        raise InputError("psi-tau needs a smooth function")
    _emit(_measure_payload(psi_tau(tau, f, _box(args, f.n), args.grid), args), args)
    return 0


def cmd_klain(args) -> int:
    tau = _load_form(args.form)
    if args.frame is None:
        raise InputError("klain needs --frame")
    frame = Frame.from_dict(_load_json(args.frame))
    value = klain(tau, frame)
    _emit({"klain": {"re": value.real, "im": value.imag}}, args)
    return 0


def cmd_extract_density(args) -> int:
    n = args.n or 2
    x = np.zeros(n) if args.x is None else np.array([float(v) for v in args.x.split(",")])
    if len(x) != n:
        raise InputError("--x must have n coordinates")
    psi = args.scale * ma_valuation(Box.cube(n, max(args.box, 2 * float(np.abs(x).max()) + 2)), args.grid)
    est = extract_density(psi, x, args.m, n)
    _emit({"value": {"re": est.value.real, "im": est.value.imag}, "volume_ratio": est.volume_ratio, "m": args.m}, args)
    return 0


def cmd_form(args) -> int:
    n = args.n or 2
    if args.kind == "hessian":
        if args.k is None:
            raise InputError("form hessian needs --k")
        tau = hessian_form(n, args.k)
    else:
        if not args.rows:
            raise InputError("form minor needs --rows")
        tau = principal_minor_form(n, [int(r) for r in args.rows.split(",")])
    _emit(tau.chop(1e-12).to_dict(), args)
    return 0


def cmd_check(args) -> int:
    suite = SUITES.get(args.suite.replace("-", "_"))
    if suite is None:
        raise InputError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    params = inspect.signature(suite).parameters
    kwargs: dict[str, Any] = {"seed": args.seed if args.seed is not None else default_seed()}
    if args.n is not None:
        kwargs["n"] = args.n
    if args.k is not None and "k" in params:
        kwargs["k"] = args.k
    if args.grid_given and "grid" in params:
        kwargs["grid"] = args.grid
    if args.tolerance is not None and "quad_tol" in params:
        kwargs["quad_tol"] = args.tolerance
    report = suite(**kwargs)
    print(report.table())
    if args.json_out:
        Path(args.json_out).write_text(report.to_json() + "\n")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="ambient dimension")
    common.add_argument("--k", type=int, help="degree / fiber degree")
    common.add_argument("--grid", type=int, default=None, help="cells per axis for densities (default 64)")
    common.add_argument("--box", type=float, default=2.0, help="half-width of the centered window")
    common.add_argument("--seed", type=int, help="seed (default: MAVALTK_SEED or 0)")
    common.add_argument("--json-in", dest="json_in", help="input JSON file ('-' for stdin)")
    common.add_argument("--json-out", dest="json_out", help="write the JSON result here as well")
    common.add_argument("--tolerance", type=float, help="atom cut-off for measures; quadrature tolerance for checks")

    p = argparse.ArgumentParser(prog="mavaltk", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("ma", parents=[common], help="MA measure (atoms for max-affine, density for smooth)").set_defaults(func=cmd_ma)
    sub.add_parser("mixed-ma", parents=[common], help="mixed MA of n functions").set_defaults(func=cmd_mixed_ma)
    sub.add_parser("hessian", parents=[common], help="k-th Hessian measure").set_defaults(func=cmd_hessian)
    sp = sub.add_parser("psi-tau", parents=[common], help="measure generated by a primitive form")
    sp.add_argument("--form", required=False)
    sp.set_defaults(func=cmd_psi_tau)
    sp = sub.add_parser("klain", parents=[common], help="Klain value of a form on a frame")
    sp.add_argument("--form")
    sp.add_argument("--frame")
    sp.set_defaults(func=cmd_klain)
    sp = sub.add_parser("extract-density", parents=[common], help="density of c*MA from its ball atom")
    sp.add_argument("--m", type=int, default=64, help="vertices of the ball approximation")
    sp.add_argument("--x", help="comma separated point")
    sp.add_argument("--scale", type=float, default=1.0, help="the constant c in c*MA")
    sp.set_defaults(func=cmd_extract_density)
    sp = sub.add_parser("form", parents=[common], help="write a standard primitive form as JSON")
    sp.add_argument("kind", choices=["hessian", "minor"])
    sp.add_argument("--rows", help="comma separated rows for a principal-minor form")
    sp.set_defaults(func=cmd_form)
    sp = sub.add_parser("check", parents=[common], help="run a named check suite")
    sp.add_argument("suite", help=", ".join(SUITES))
    sp.set_defaults(func=cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    args.grid_given = args.grid is not None
    if args.grid is None:
        args.grid = 64
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
