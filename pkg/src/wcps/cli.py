"""Command-line front end: wcps generate|scan|cfrac|brs|compare.

Exit codes: 0 success, 2 input parse error, 3 semantic rejection,
4 internal tolerance failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .bdlab import Lebesgue, LatticeComb, bd_compare, main_theorem_pipeline, realize_comb
from .cfrac import cf_convergents, cf_expand, gl_condition
from .exactnum import QuadNum, format_quad, parse_quad
from .regions import PolygonRegion, RegionError, flow_strip, unit_square
from .rotation import delta_sup_scan, delta_t
from .scheme import SchemeError, enumerate_points, fibonacci_preset, golden_ratio, scheme_from_dict
from .weights import WeightError, make_c2_dome, make_cosine_arc, make_hat, weight_from_dict, Indicator

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_TOLERANCE = 0, 2, 3, 4
PRESETS = {"fibonacci": "full", "fibonacci-full": "full", "fibonacci-half": "half"}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    command: str
    scheme: str | None = None
    weight: str | None = None
    T: str | None = None
    checkpoints: list = field(default_factory=list)
    out: str | None = None
    precision: int = 256
    jobs: int = 1
    seed: int = 0

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        cfg = cls(args.command, getattr(args, "scheme", None), getattr(args, "weight", None),
                  getattr(args, "T", None), [], args.out, args.precision, args.jobs, args.seed)
        if cfg.precision < 53:
            raise CliError(EXIT_PARSE, "precision must be at least 53 bits")
        if cfg.jobs < 1:
            raise CliError(EXIT_PARSE, "jobs must be at least 1")
        return cfg


def _fmt(x) -> str:
    return repr(float(x))


# input parsing -------------------------------------------------------------
def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise CliError(EXIT_PARSE, f"{what}: invalid JSON at byte {offset}: {exc.msg}") from exc


def load_scheme(arg: str):
    if arg in PRESETS:
        return fibonacci_preset(PRESETS[arg])
    if not os.path.exists(arg):
        raise CliError(EXIT_PARSE, f"scheme file not found: {arg}")
    with open(arg, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{arg}: not UTF-8 at byte {exc.start}") from exc
    data = _load_json(text, arg)
    if not isinstance(data, dict):
        raise CliError(EXIT_PARSE, f"{arg}: expected a JSON object at byte 0")
    try:
        return scheme_from_dict(data)
    except (SchemeError, ValueError) as exc:
        raise CliError(EXIT_SEMANTIC, f"{arg}: {exc}") from exc


def parse_weight(arg: str | None, s):
    """indicator | hat[:peak[:value]] | dome[:amp] | cosine[:amp] | JSON (inline or file)."""
    if arg is None:
        return None
    a, b = s.window.a, s.window.b
    try:
        if arg.startswith("{") or arg.endswith(".json"):
            text = arg
            if not arg.startswith("{"):
                if not os.path.exists(arg):
                    raise CliError(EXIT_PARSE, f"weight file not found: {arg}")
                with open(arg, encoding="utf-8") as fh:
                    text = fh.read()
            data = _load_json(text, "weight")
            if not isinstance(data, dict):
                raise CliError(EXIT_PARSE, "weight: expected a JSON object at byte 0")
            return weight_from_dict(data, s.d)
        kind, *args = arg.split(":")
        q = [parse_quad(x, s.d if s.d > 1 else None) for x in args]
        if kind == "indicator":
            return Indicator(a, b)
        if kind == "hat":
            peak = q[0] if q else (a + b) / 2
            return make_hat((a, b), peak, q[1] if len(q) > 1 else 1)
        if kind == "dome":
            return make_c2_dome((a, b), q[0] if q else 1)
        if kind == "cosine":
            return make_cosine_arc((a, b), q[0] if q else 1)
    except WeightError as exc:
        raise CliError(EXIT_SEMANTIC, f"weight: {exc}") from exc
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"weight: {exc}") from exc
    raise CliError(EXIT_SEMANTIC, f"unsupported weight {arg!r}")


def _quad_arg(text: str, name: str) -> QuadNum:
    try:
        return parse_quad(text)
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"{name}: {exc}") from exc


def _checkpoints(text: str | None, default):
    if not text:
        return list(default)
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"checkpoints: {exc}") from exc


def _emit(text: str, out: str | None, suffix: str):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out + suffix, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _positive_T(text: str | None) -> QuadNum:
    if text is None:
        raise CliError(EXIT_PARSE, "--T is required")
    T = _quad_arg(text, "T")
    if not T > 0:
        raise CliError(EXIT_SEMANTIC, "T must be positive")
    return T


# commands -------------------------------------------------------------------
def cmd_generate(args) -> int:
    s = load_scheme(args.scheme)
    h = parse_weight(args.weight, s)
    T = _positive_T(args.T)
    pts = enumerate_points(s, 0, T)
    if h is None:
        masses = ["1"] * len(pts)
    elif h.exact:
        masses = [format_quad(v) for v in h.eval_qvec(pts.internal).to_list()]
    else:
        masses = [_fmt(v) for v in h.eval_float(pts.internal_float())]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["direct", "direct_float", "internal", "internal_float", "mass"])
    df, inf = pts.direct_float(), pts.internal_float()
    for k, p in enumerate(pts.directs()):
        w.writerow([format_quad(p), _fmt(df[k]), format_quad(pts.internal[k]), _fmt(inf[k]), masses[k]])
    _emit(buf.getvalue(), args.out, ".csv")
    return EXIT_OK


def cmd_scan(args) -> int:
    s = load_scheme(args.scheme)
    h = parse_weight(args.weight, s)
    cps = [int(c) for c in _checkpoints(args.checkpoints, (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5))]
    try:
        rep = main_theorem_pipeline(s, h, atom_checkpoints=cps, T0=cps[1] if len(cps) > 1 else cps[0])
    except (WeightError, RegionError, SchemeError) as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from exc
    prof = rep.pop("profile")
    if args.out is not None:
        _emit(prof.to_csv(), args.out, "_trace.csv")
    text = json.dumps(rep, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out, "_verdict.json")
    if args.out is not None:
        sys.stdout.write(f"verdict: {rep['verdict']}\n")
    return EXIT_OK


def cmd_cfrac(args) -> int:
    x = _quad_arg(args.number, "number")
    if x.is_rational:
        raise CliError(EXIT_SEMANTIC, "rational input has a finite expansion; need a quadratic irrational")
    cf = cf_expand(x)
    terms = int(args.terms)
    gl = gl_condition(cf, terms, prec=max(int(args.precision), 53))
    conv = cf_convergents(cf, terms)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "a", "q", "S"])
    for m in range(terms + 1):
        w.writerow([m, cf.quotient(m), conv.q[m], _fmt(gl.sums[m])])
    head = f"{cf}\n"
    if args.out is None:
        sys.stdout.write(head + buf.getvalue())
    else:
        sys.stdout.write(head)
        _emit(buf.getvalue(), args.out, "_sums.csv")
    return EXIT_OK


def parse_region(arg: str, alpha):
    """square | rhombus | strip:W (flow-aligned) | vstrip:W | JSON {"vertices": [...]}."""
    kind, *rest = arg.split(":", 1)
    try:
        if kind == "square":
            return unit_square()
        if kind == "rhombus":
            half = Fraction(1, 2)
            return PolygonRegion.from_vertices([(0, half), (half, 1), (1, half), (half, 0)])
        if kind == "strip":
            return flow_strip(alpha, _quad_arg(rest[0], "width"))
        if kind == "vstrip":
            w = _quad_arg(rest[0], "width")
            return PolygonRegion.from_vertices([(0, 0), (w, 0), (w, 1), (0, 1)])
        if arg.startswith("{") or arg.endswith(".json"):
            text = arg
            if not arg.startswith("{"):
                with open(arg, encoding="utf-8") as fh:
                    text = fh.read()
            data = _load_json(text, "region")
            verts = [(_quad_arg(str(x), "vertex"), _quad_arg(str(y), "vertex")) for x, y in data["vertices"]]
            return PolygonRegion.from_vertices(verts)
    except (IndexError, KeyError, TypeError) as exc:
        raise CliError(EXIT_PARSE, f"region: malformed arg {arg!r}") from exc
    except (RegionError, ValueError) as exc:
        raise CliError(EXIT_SEMANTIC, f"region: {exc}") from exc
    raise CliError(EXIT_PARSE, f"region: unknown kind {kind!r}")


def cmd_brs(args) -> int:
    alpha = _quad_arg(args.alpha, "alpha") if args.alpha else golden_ratio()
    P = parse_region(args.region, alpha)
    if not P.inside_unit_square():
        raise CliError(EXIT_SEMANTIC, "region leaves the unit square")
    T = float(_positive_T(args.T))
    try:
        x = tuple(_quad_arg(v, "x") for v in args.x.split(","))
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"x: {exc}") from exc
    cps = _checkpoints(args.checkpoints, [10.0 ** k for k in range(0, 20) if 10.0 ** k <= T])
    tr = delta_sup_scan(P, alpha, x, T, checkpoints=cps, jobs=args.jobs)
    # float scan against the exact value at the first checkpoint
    if P.exact and len(tr.times):
        t0 = tr.times[0]
        exact = float(delta_t(P, alpha, x, QuadNum(Fraction(t0))))
        if abs(exact - tr.values[0]) > 1e-6 * max(1.0, t0):
            raise CliError(EXIT_TOLERANCE, f"float scan disagrees with exact value at t={t0}")
    _emit(tr.to_csv(), args.out, "_delta.csv")
    return EXIT_OK


def _measure(arg: str, s, h, T):
    if arg == "lebesgue":
        from .scheme import density

        return Lebesgue(density(s, h))
    if arg.startswith("lattice:"):
        return LatticeComb(_quad_arg(arg.split(":", 1)[1], "spacing"))
    s2 = load_scheme(arg)
    return realize_comb(s2, None, T)


def cmd_compare(args) -> int:
    s = load_scheme(args.scheme)
    h = parse_weight(args.weight, s)
    T = _positive_T(args.T)
    mu = realize_comb(s, h, T)
    nu = _measure(args.against, s, h, T)
    rep = bd_compare(mu, nu, T, interval_samples=int(args.samples), seed=int(args.seed))
    _emit(json.dumps(rep, indent=2, sort_keys=True) + "\n", args.out, "_compare.json")
    return EXIT_OK


# argument parsing -----------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wcps", description="Weighted cut-and-project sets and bounded remainder sets.")
    p.add_argument("--version", action="version", version=f"wcps {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scheme=True):
        if scheme:
            sp.add_argument("--scheme", default="fibonacci", help="preset name or scheme JSON file")
            sp.add_argument("--weight", default=None, help="indicator | hat[:peak[:value]] | dome[:amp] | cosine[:amp] | JSON")
        sp.add_argument("--out", default=None, help="output prefix (default: stdout)")
        sp.add_argument("--precision", type=int, default=256, help="bits for numeric paths")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("generate", help="list CPS points (and masses) on [0, T]")
    common(g)
    g.add_argument("--T", required=True)
    g.set_defaults(func=cmd_generate)

    sc = sub.add_parser("scan", help="defect scan and bd verdict")
    common(sc)
    sc.add_argument("--checkpoints", default=None, help="atom counts, comma separated")
    sc.set_defaults(func=cmd_scan)

    cf = sub.add_parser("cfrac", help="continued fraction and convergence sums")
    common(cf, scheme=False)
    cf.add_argument("number")
    cf.add_argument("--terms", type=int, default=200)
    cf.set_defaults(func=cmd_cfrac)

    b = sub.add_parser("brs", help="distributional error trace of a region")
    common(b, scheme=False)
    b.add_argument("--region", default="rhombus", help="square | rhombus | strip:W | vstrip:W | JSON polygon")
    b.add_argument("--alpha", default=None, help="slope (default golden ratio)")
    b.add_argument("--x", default="0,0", help="starting point")
    b.add_argument("--T", required=True)
    b.add_argument("--checkpoints", default=None)
    b.set_defaults(func=cmd_brs)

    c = sub.add_parser("compare", help="bounded-distance comparison of two measures")
    common(c)
    c.add_argument("--against", default="lebesgue", help="lebesgue | lattice:SPACING | scheme")
    c.add_argument("--T", required=True)
    c.add_argument("--samples", type=int, default=10000)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    try:
        RunConfig.from_args(args)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
