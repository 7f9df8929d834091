"""Command-line front end: argument parsing, JSON/CSV serialization, and
dispatch into the library modules.

Every numeric output carries {value, error, method}.  Exit codes: 0 on
success, 1 on numeric-precision failure, 2 on input rejection.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .asymptotics import (
    AnalysisParams,
    choose_U,
    choose_eps,
    count,
    family_asymptotic_table,
    hypercube_budget_sweep,
    m_rho,
    main_term,
    synth_spectrum,
)
from .besseltransform import (
    PrecisionError,
    bessel_j_err,
    transform_axis,
    transform_contour,
)
from .kloosterman import kloosterman_sum, ksum, trivial_bound, trivial_character
from .measures import V_b_lambda_factor, npl, nu_theta, nv_b, pl_lambda
from .numberfield import IdealLattice, QuadField, make_field
from .regions import PlaceFactor, ProductRegion, family, imaginary_box
from .testfunctions import gaussian_phi, phi_p


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Round-trippable run configuration: parse(print(cfg)) == cfg."""

    field_spec: str = "Q"
    level: str = "1"
    character: str = "trivial"
    params: dict = field(default_factory=lambda: {"tau": 0.3, "a": 3.0,
                                                  "delta": 0.01})
    output_format: str = "json"
    seed: int = 0
    threads: int = 1

    def print_config(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------

def parse_field(spec: str) -> QuadField:
    s = spec.strip().replace(" ", "")
    if s in ("Q", "q", "1"):
        return make_field(1)
    for pre, post in (("Q(sqrt", ")"), ("Qsqrt", "")):
        if s.startswith(pre) and s.endswith(post):
            body = s[len(pre):len(s) - len(post)] if post else s[len(pre):]
            return make_field(int(body))
    return make_field(int(s))


def parse_element(F: QuadField, spec: str):
    parts = [Fraction(p) for p in str(spec).split(",")]
    if len(parts) == 1:
        return F.element(parts[0])
    if len(parts) == 2 and F.d == 2:
        return F.element(parts[0], parts[1])
    raise ValueError(f"element spec {spec!r} has wrong arity for {F}")


def parse_region(spec: str) -> ProductRegion:
    """Compact region syntax: factors joined by 'x'; each factor is
    i[a,b] (imaginary interval), r[a,b] (complementary interval), or
    d[p] (discrete point), with an optional :parity suffix."""
    factors = []
    for tok in spec.replace(" ", "").split("x"):
        parity = 0
        if ":" in tok:
            tok, par = tok.rsplit(":", 1)
            parity = int(par)
        if len(tok) < 4 or tok[1] != "[" or not tok.endswith("]"):
            raise ValueError(f"bad region factor {tok!r}")
        kind, body = tok[0], tok[2:-1]
        vals = [float(Fraction(v)) for v in body.split(",")]
        if kind == "i" and len(vals) == 2:
            factors.append(PlaceFactor(parity=parity, im=((vals[0], vals[1]),)))
        elif kind == "r" and len(vals) == 2:
            factors.append(PlaceFactor(parity=parity, re=((vals[0], vals[1]),)))
        elif kind == "d" and len(vals) == 1:
            factors.append(PlaceFactor(parity=parity, disc=(vals[0],)))
        else:
            raise ValueError(f"bad region factor {tok!r}")
    return ProductRegion(tuple(factors))


def parse_grid(spec: str):
    """'lo:hi:n' -> n geometrically spaced points."""
    lo, hi, n = spec.split(":")
    n = int(n)
    if n < 2:
        raise ValueError("grid needs at least 2 points")
    return [float(v) for v in np.geomspace(float(lo), float(hi), n)]


def parse_phi(spec: str):
    name, _, body = spec.partition(":")
    kw = {}
    for item in filter(None, body.split(",")):
        k, _, v = item.partition("=")
        kw[k] = float(v.rstrip("i").rstrip("j")) if v else 0.0
    if name == "gaussian":
        return gaussian_phi(kw.get("q", 10.0), kw.get("U", 25.0),
                            tau=kw.get("tau", 0.3), a=kw.get("a", 3.0))
    if name == "phi_p":
        return phi_p(kw.get("p", 1.0), a=kw.get("a", 3.0),
                     tau=kw.get("tau", 0.3))
    raise ValueError(f"unknown test function {name!r}")


def _json_default(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)}")


def emit(obj, stream=None):
    print(json.dumps(obj, sort_keys=True, default=_json_default),
          file=stream or sys.stdout)


def measure_dict(res) -> dict:
    return {"value": res.value, "error": res.error, "method": res.method}


# --------------------------------------------------------------------------
# subcommand handlers
# --------------------------------------------------------------------------

def cmd_kloosterman(args) -> int:
    F = parse_field(args.field)
    c = parse_element(F, args.c)
    r = parse_element(F, args.r)
    rp = parse_element(F, args.rp if args.rp is not None else args.r)
    if args.chi != "trivial":
        raise ValueError("only the trivial character is supported here")
    level = IdealLattice.principal(parse_element(F, args.level)) \
        if args.level else IdealLattice.principal(c)
    chi = trivial_character(F, level)
    S = kloosterman_sum(F, chi, r, rp, c)
    emit({"value": complex(S), "error": 1e-13 * trivial_bound(F, c),
          "method": "exact-phase brute force",
          "trivial_bound": trivial_bound(F, c)})
    return 0


def cmd_ksum(args) -> int:
    F = parse_field(args.field)
    level = IdealLattice.principal(parse_element(F, args.level))
    chi = trivial_character(F, level)
    r = parse_element(F, args.r)
    tau = args.tau

    def f(t):
        return math.prod(min(abs(tj) ** (2 * tau), 1.0) for tj in t)

    res = ksum(F, level, chi, r, f, box=args.box, K_f=args.K, tau=tau)
    emit({"value": complex(res.partial_sum), "error": res.tail_estimate,
          "method": "partial sum + square-root-cancellation tail",
          "terms": res.terms_used, "truncation": res.truncation})
    return 0


def cmd_measure(args) -> int:
    if args.kind == "pl":
        res = pl_lambda(args.parity, args.lo, args.hi)
    else:
        region = parse_region(args.region)
        if args.kind == "npl":
            res = npl(region)
        elif args.kind == "nv":
            res = nv_b(args.b, region)
        else:
            raise ValueError(f"unknown measure kind {args.kind!r}")
    emit(measure_dict(res))
    return 0


def cmd_region_volume(args) -> int:
    kw = {}
    if args.family == "simplex":
        kw["n"] = args.n
        t = args.Y
    else:
        t = args.t
    if args.family == "sphere":
        kw["m"] = [float(v) for v in args.m.split(",")]
        kw["r"] = args.r
    if args.family == "sector":
        kw.update(p=args.p, q=args.q, alpha=args.alpha)
    if args.family == "slanted-strip":
        kw.update(a=args.a, b=args.b, c=args.c)
    if args.family in ("box", "hypercube"):
        kw["a"] = [float(v) for v in args.a_list.split(",")]
        if args.family == "box":
            kw["b"] = [float(v) for v in args.b_list.split(",")]
        else:
            kw["sigma"] = args.sigma
    if args.family == "singleton":
        kw["points"] = [float(v) for v in args.points.split(",")]
        kw["parities"] = [int(v) for v in args.parities.split(",")]
    fam = family(args.family, **kw)
    if args.method == "closed":
        res = fam.closed_form_nv1(t) if t is not None else fam.closed_form_nv1()
    elif args.method == "quadrature":
        res = fam.quadrature_nv1(t) if t is not None else fam.quadrature_nv1()
    elif args.method == "mc":
        inst = fam.instance(t) if t is not None else fam.instance()
        res = inst.mc_nv1(args.samples, seed=args.seed)
    else:
        raise ValueError(f"unknown method {args.method!r}")
    emit(measure_dict(res))
    return 0


def cmd_bessel(args) -> int:
    if args.order is not None:
        v, e = bessel_j_err(complex(args.order), args.x)
        emit({"value": v, "error": e, "method": "ascending series"})
        return 0
    phi = parse_phi(args.phi)
    out = {}
    if args.formula in ("axis", "both"):
        r = transform_axis(phi, args.parity, args.eta, args.t)
        out["axis"] = {"value": r.value, "error": r.error, "method": "axis"}
    if args.formula in ("contour", "both"):
        r = transform_contour(phi, args.parity, args.eta, args.t)
        out["contour"] = {"value": r.value, "error": r.error,
                          "method": "contour"}
    if not out:
        raise ValueError(f"unknown formula {args.formula!r}")
    emit(out)
    return 0


def cmd_budget(args) -> int:
    F = parse_field(args.field)
    grid = parse_grid(args.t_grid)
    budgets = hypercube_budget_sweep(F, grid, sigma=args.sigma)
    rows = [{"t": t, "value": b.main_term, "error": b.total_error,
             "method": "error-budget",
             "pieces": {"kloosterman": b.kloosterman_piece,
                        "smoothing": b.smoothing_piece,
                        "boundary": b.boundary_piece,
                        "plancherel": b.eisenstein_bound},
             "U": b.U, "eps": b.eps, "ratio": b.ratio}
            for t, b in zip(grid, budgets)]
    emit({"rows": rows})
    return 0


_FAMILY_ROWS = {
    "weyl1": (lambda: np.geomspace(100, 1000, 5), {}),
    "weyl2": (lambda: np.geomspace(100, 1000, 5), {}),
    "slant": (lambda: np.geomspace(1000, 10000, 5),
              {"a": 1.0, "b": 0.0, "c": 1.0}),
    "sphere": (lambda: np.geomspace(100, 1000, 5), {"r": 1.0}),
    "sector": (lambda: np.geomspace(1e6, 1e7, 5),
               {"p": 1.0, "q": 2.0, "alpha": 0.75}),
    "rectquad": (lambda: np.geomspace(1e4, 1e5, 5),
                 {"alpha": 1.25, "beta": 9.25}),
    "holo": (lambda: [1.0, 2.0, 3.0], {"points": [2.0, 3.5]}),
}


def cmd_families(args) -> int:
    F = parse_field(args.field)
    names = args.rows.split(",") if args.rows else list(_FAMILY_ROWS)
    rows = []
    for name in names:
        if name not in _FAMILY_ROWS:
            raise ValueError(f"unknown family row {name!r}")
        grid, kw = _FAMILY_ROWS[name]
        rows.append(family_asymptotic_table(name, F, grid(), **kw))
    if args.report == "csv":
        print("family,constant,exponent,target,target_exponent,rel_deviation")
        for r in rows:
            const = r.get("constant_at_target_exponent", r.get("value"))
            print(f"{r['family']},{const},{r['exponent']},"
                  f"{r['target']},{r['target_exponent']},"
                  f"{r['rel_deviation']}")
    else:
        emit({"rows": [{k: v for k, v in r.items() if k != "values"}
                       for r in rows]})
    return 0


def cmd_synth_count(args) -> int:
    F = parse_field(args.field)
    if args.family != "hypercube":
        raise ValueError("synthetic counting supports the hypercube family")
    fam = family("hypercube", a=[lambda t: t] * F.d, sigma=args.sigma)
    region = fam.instance(args.a).product
    spec = synth_spectrum(F, region, seed=args.seed,
                          weight_law=args.weight_law)
    mt = main_term(region, F)
    c = count(spec, region=region)
    emit({"value": c, "error": 3 * math.sqrt(max(mt, 1.0)),
          "method": "poisson-synthetic", "main_term": mt,
          "ratio": c / mt, "points": len(spec), "seed": args.seed})
    return 0


# --------------------------------------------------------------------------
# check suites
# --------------------------------------------------------------------------

def _suite_kloosterman_small() -> dict:
    F = make_field(1)
    checks = {}
    for cval, want in ((3, -1.0), (4, -2.0)):
        c = F.element(cval)
        chi = trivial_character(F, IdealLattice.principal(c))
        S = kloosterman_sum(F, chi, F.one(), F.one(), c)
        checks[f"S(1,1;{cval})"] = abs(S - want) < 1e-10
    F2 = make_field(2)
    c = F2.element(3)
    chi = trivial_character(F2, IdealLattice.principal(c))
    S = kloosterman_sum(F2, chi, F2.one(), F2.one(), c)
    checks["bound Q(sqrt2) c=3"] = abs(S) <= trivial_bound(F2, c) + 1e-9
    return checks


def _suite_identities() -> dict:
    checks = {}
    F5 = make_field(5)
    row = family_asymptotic_table("holo", F5, [1, 2, 3], points=[2.0, 3.5])
    checks["holomorphic main-term identity"] = row["rel_deviation"] < 1e-12
    m = math.exp(-100)
    U = choose_U(m, 0.5, 1)
    eps = choose_eps(m, U)
    checks["U eps^2 identity"] = abs(
        U * eps * eps - 0.5 * math.log(100)) < 1e-12
    v = V_b_lambda_factor(1.0, [(77.0 / 324.0, 1.25)]).value
    checks["middle-band mass"] = abs(v - (1 + nu_theta())) < 1e-10
    checks["simplex W_2(4.5)"] = abs(
        family("simplex", n=2).closed_form_nv1(4.5).value - 0.5) < 1e-12
    return checks


def cmd_check(args) -> int:
    suites = {"kloosterman-small": _suite_kloosterman_small,
              "identities": _suite_identities}
    if args.suite == "all":
        names = list(suites)
    elif args.suite in suites:
        names = [args.suite]
    else:
        raise ValueError(f"unknown suite {args.suite!r}")
    report, ok = {}, True
    for name in names:
        checks = suites[name]()
        report[name] = checks
        ok &= all(checks.values())
    emit({"pass": ok, "suites": report})
    return 0 if ok else 1


# --------------------------------------------------------------------------
# parser / dispatch
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specsum")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("SPECSUM_THREADS", "1")))
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kloosterman")
    k.add_argument("--field", default="Q")
    k.add_argument("--c", required=True)
    k.add_argument("--r", required=True)
    k.add_argument("--rp")
    k.add_argument("--chi", default="trivial")
    k.add_argument("--level")
    k.set_defaults(func=cmd_kloosterman)

    ks = sub.add_parser("ksum")
    ks.add_argument("--field", default="Q")
    ks.add_argument("--level", default="1")
    ks.add_argument("--r", default="1")
    ks.add_argument("--box", type=float, default=30.0)
    ks.add_argument("--K", type=float, default=1.0)
    ks.add_argument("--tau", type=float, default=0.3)
    ks.set_defaults(func=cmd_ksum)

    m = sub.add_parser("measure")
    m.add_argument("--kind", required=True, choices=["npl", "nv", "pl"])
    m.add_argument("--b", type=float, default=1.0)
    m.add_argument("--region")
    m.add_argument("--parity", type=int, default=0)
    m.add_argument("--lo", type=float)
    m.add_argument("--hi", type=float)
    m.set_defaults(func=cmd_measure)

    rv = sub.add_parser("region-volume")
    rv.add_argument("--family", required=True)
    rv.add_argument("--method", default="closed",
                    choices=["closed", "quadrature", "mc"])
    rv.add_argument("--n", type=int)
    rv.add_argument("--Y", type=float)
    rv.add_argument("--t", type=float)
    rv.add_argument("--m")
    rv.add_argument("--r", type=float)
    rv.add_argument("--p", type=float)
    rv.add_argument("--q", type=float)
    rv.add_argument("--alpha", type=float)
    rv.add_argument("--a", type=float)
    rv.add_argument("--b", type=float)
    rv.add_argument("--c", type=float)
    rv.add_argument("--a-list", dest="a_list")
    rv.add_argument("--b-list", dest="b_list")
    rv.add_argument("--sigma", type=float)
    rv.add_argument("--points")
    rv.add_argument("--parities")
    rv.add_argument("--samples", type=int, default=10 ** 5)
    rv.add_argument("--seed", type=int, default=0)
    rv.set_defaults(func=cmd_region_volume)

    b = sub.add_parser("bessel")
    b.add_argument("--phi")
    b.add_argument("--parity", type=int, default=0)
    b.add_argument("--eta", type=int, default=1)
    b.add_argument("--t", type=float)
    b.add_argument("--formula", default="both",
                   choices=["axis", "contour", "both"])
    b.add_argument("--order")
    b.add_argument("--x", type=float)
    b.set_defaults(func=cmd_bessel)

    bu = sub.add_parser("budget")
    bu.add_argument("--field", default="Q(sqrt5)")
    bu.add_argument("--t-grid", dest="t_grid", default="3e8:3e12:5")
    bu.add_argument("--sigma", type=float, default=40.0)
    bu.set_defaults(func=cmd_budget)

    fa = sub.add_parser("families")
    fa.add_argument("--field", default="Q(sqrt5)")
    fa.add_argument("--report", default="json", choices=["json", "csv"])
    fa.add_argument("--rows")
    fa.set_defaults(func=cmd_families)

    sc = sub.add_parser("synth-count")
    sc.add_argument("--field", default="Q(sqrt5)")
    sc.add_argument("--family", default="hypercube")
    sc.add_argument("--a", type=float, default=500.0)
    sc.add_argument("--sigma", type=float, default=0.3)
    sc.add_argument("--weight-law", dest="weight_law", default="unit")
    sc.add_argument("--seed", type=int, default=0)
    sc.set_defaults(func=cmd_synth_count)

    ch = sub.add_parser("check")
    ch.add_argument("suite")
    ch.add_argument("--quick", action="store_true")
    ch.set_defaults(func=cmd_check)

    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PrecisionError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ZeroDivisionError, KeyError, TypeError,
            AttributeError, NotImplementedError) as exc:
        print(f"input rejected: {exc}", file=sys.stderr)
        return 2


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
