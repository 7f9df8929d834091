"""Error budgets, smoothing-parameter selection, main-term asymptotics for
the special region families, and a synthetic-spectrum counting pipeline.

The budget machinery quantifies how well the weighted spectral count over a
product region C = C+ x C- is approximated by the main term
(2 sqrt|D_F| / (2 pi)^d) * pl(C): the error splits into a Kloosterman piece,
a test-function-tail (smoothing) piece, a boundary-shell piece, and a
Plancherel-smoothing piece of size U^{-1/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .measures import (
    LAMBDA_STAR_DEFAULT,
    npl,
    nv_1,
    nv_b,
    pl_lambda,
    plancherel_density,
)
from .numberfield import QuadField
from .regions import (
    HypercubeFamily,
    ProductRegion,
    discrete_singleton,
    imaginary_box,
    shell_growth_constant,
    shells,
    unit_ball_volume,
)


# --------------------------------------------------------------------------
# analysis parameters
# --------------------------------------------------------------------------

_GAMMA_DEFAULT = 0.45  # exponent split in the large-nu Bessel estimate


@dataclass(frozen=True)
class AnalysisParams:
    """Smoothing/decay parameters.  Defaults follow the standard
    construction with delta = 0.01: t0 = (1/2) tau^2 (1+delta),
    rho = rho1 + (1-rho1) delta with rho1 = 3/2 - 0.45 - tau, A = 3 - 2 delta.
    All fields are overridable; only the stated ranges are enforced."""

    tau: float = 0.3
    a: float = 3.0
    delta: float = 0.01
    t0: float = None
    rho: float = None
    A: float = None
    lambda_star: float = LAMBDA_STAR_DEFAULT

    def __post_init__(self):
        if self.t0 is None:
            object.__setattr__(self, "t0",
                               0.5 * self.tau ** 2 * (1 + self.delta))
        if self.rho is None:
            rho1 = 1.5 - _GAMMA_DEFAULT - self.tau
            object.__setattr__(self, "rho", rho1 + (1 - rho1) * self.delta)
        if self.A is None:
            object.__setattr__(self, "A", 3 - 2 * self.delta)
        if not 0.25 < self.tau < 0.5:
            raise ValueError("tau must lie in (1/4, 1/2)")
        if self.a <= 2:
            raise ValueError("a must exceed 2")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if not 1 - self.tau < self.rho < 1:
            raise ValueError("rho must lie in (1 - tau, 1)")
        if self.A <= 2:
            raise ValueError("A must exceed 2")


def field_prefactor(F: QuadField) -> float:
    """2 sqrt|D_F| / (2 pi)^d, the constant in front of the main term."""
    return 2 * math.sqrt(abs(F.discriminant)) / (2 * math.pi) ** F.d


# --------------------------------------------------------------------------
# m_rho, beta_eps and the choice of U, eps
# --------------------------------------------------------------------------

def _nv(b, region):
    return 1.0 if region is None else nv_b(b, region).value


def m_rho(c_plus, c_minus, params: AnalysisParams) -> float:
    """nv_rho(C+) nv_{-A}(C-) / nv_1(C); the small parameter driving the
    choice of U.  Either region may be None (empty coordinate set)."""
    denom = _nv(1.0, c_plus) * _nv(1.0, c_minus)
    if denom <= 0:
        raise ValueError("nv_1(C) must be positive")
    return _nv(params.rho, c_plus) * _nv(-params.A, c_minus) / denom


def beta_eps(c_plus, eps: float) -> float:
    """Relative nv_1 mass of the boundary shell C+[2 eps]."""
    base = nv_1(c_plus).value
    if base <= 0:
        raise ValueError("nv_1(C+) must be positive")
    return shells(c_plus, 2 * eps).nv1_ring / base


class PreAsymptoticError(ValueError):
    """m_rho is too large for the smoothing parameters to be admissible."""


def choose_U(m: float, t0: float, n_qplus: int, D: float = None) -> float:
    """U = (|log m| - (1/2) log|log m|) / (t0 |Q+|).

    Requires m < 1/e so |log m| > 1; when the shell constant D is supplied
    the admissibility floor U > D e^2 is enforced.
    """
    if n_qplus < 1:
        raise ValueError("Q+ must be nonempty to choose U")
    if not 0 < m < math.exp(-1):
        raise PreAsymptoticError(
            f"m_rho={m:.3g} not below the 1/e threshold")
    L = abs(math.log(m))
    U = (L - 0.5 * math.log(L)) / (t0 * n_qplus)
    if D is not None and U <= D * math.e ** 2:
        # invert the defining formula at the floor to report a threshold on m
        l_star = t0 * n_qplus * D * math.e ** 2
        l_star += 0.5 * math.log(max(l_star, math.e))
        raise PreAsymptoticError(
            f"pre-asymptotic regime: U={U:.6g} <= D e^2 = "
            f"{D * math.e ** 2:.6g}; need m_rho below ~{math.exp(-l_star):.3g}")
    return U


def choose_eps(m: float, U: float) -> float:
    """eps = sqrt(log|log m| / (2U)); satisfies U eps^2 = (1/2) log|log m|
    exactly."""
    if not 0 < m < math.exp(-1):
        raise PreAsymptoticError(
            f"m_rho={m:.3g} not below the 1/e threshold")
    if U <= 0:
        raise ValueError("U must be positive")
    return math.sqrt(math.log(abs(math.log(m))) / (2 * U))


# --------------------------------------------------------------------------
# error budget
# --------------------------------------------------------------------------

@dataclass
class ErrorBudget:
    main_term: float
    kloosterman_piece: float
    smoothing_piece: float
    boundary_piece: float
    eisenstein_bound: float  # the U^{-1/2} Plancherel-smoothing piece
    U: float
    eps: float

    @property
    def pieces(self):
        return (self.kloosterman_piece, self.smoothing_piece,
                self.boundary_piece, self.eisenstein_bound)

    @property
    def total_error(self):
        return sum(self.pieces)

    @property
    def ratio(self):
        return self.total_error / self.main_term if self.main_term else math.inf


def main_term(region, F: QuadField) -> float:
    """(2 sqrt|D_F| / (2 pi)^d) * pl(region); 0 for an empty region."""
    if region is None:
        return 0.0
    return field_prefactor(F) * npl(region).value


def error_budget(c_plus, c_minus, params: AnalysisParams, U: float,
                 eps: float, F: QuadField) -> ErrorBudget:
    """The four-piece error bound for the count over C = C+ x C-, plus the
    main term.  With Q+ empty the whole budget collapses to nv_{-A}(C-)."""
    combined = ProductRegion(
        tuple(getattr(c_plus, "factors", ())) +
        tuple(getattr(c_minus, "factors", ())))
    main = main_term(combined, F)
    if c_plus is None or c_plus.d == 0:
        return ErrorBudget(main, _nv(-params.A, c_minus), 0.0, 0.0, 0.0,
                           U, eps)
    n_plus = c_plus.d
    _, D = shell_growth_constant(n_plus)
    if not U > D * math.e ** 2:
        raise ValueError(f"admissibility violated: U={U:.6g} <= D e^2 = "
                         f"{D * math.e ** 2:.6g}")
    lo, hi = math.sqrt(D / U), math.exp(-1)
    if not lo <= eps <= hi:
        raise ValueError(f"admissibility violated: eps={eps:.6g} outside "
                         f"[sqrt(D/U), 1/e] = [{lo:.6g}, {hi:.6g}]")
    nv1_c = _nv(1.0, c_plus) * _nv(1.0, c_minus)
    kloosterman = math.exp(params.t0 * U * n_plus) \
        * _nv(params.rho, c_plus) * _nv(-params.A, c_minus)
    smoothing = math.exp(-U * eps * eps) * nv1_c
    boundary = shells(c_plus, 2 * eps).nv1_ring * _nv(1.0, c_minus)
    plancherel_smoothing = nv1_c / math.sqrt(U)
    return ErrorBudget(main, kloosterman, smoothing, boundary,
                       plancherel_smoothing, U, eps)


def hypercube_budget_sweep(F: QuadField, t_grid, params: AnalysisParams = None,
                           sigma: float = 40.0, U_schedule=None,
                           eps_schedule=None):
    """Error budgets along a grid for the hypercube family a_j(t) = t.

    The canonical choices choose_U/choose_eps make every piece o(main), but
    only at scales t far beyond double precision (the decay is a power of
    log t).  The proposition holds for ANY admissible (U, eps), so the
    default schedules here pick admissible values for which all four pieces
    are small and decreasing at representable t: a small smoothing scale t0
    keeps the Kloosterman piece subdominant, U grows slowly (shrinking the
    U^{-1/2} piece while U eps^2 still grows), and eps shrinks slowly
    (shrinking the boundary shell).
    """
    if params is None:
        params = AnalysisParams(t0=0.005)
    t_grid = list(t_grid)
    if U_schedule is None:
        U_schedule = [600.0 + 15.0 * k for k in range(len(t_grid))]
    if eps_schedule is None:
        eps_schedule = [0.082 - 0.0008 * k for k in range(len(t_grid))]
    fam = HypercubeFamily([lambda t: t] * F.d, sigma)
    out = []
    for t, U, eps in zip(t_grid, U_schedule, eps_schedule):
        region = fam.instance(t).product
        out.append(error_budget(region, None, params, U, eps, F))
    return out


# --------------------------------------------------------------------------
# theorem-condition checks
# --------------------------------------------------------------------------

def discrete_lambda_points(parity: int, lam_min: float):
    """The lambda values (b/2)(1-b/2), b >= 2, b = parity mod 2, down to
    lam_min."""
    out = []
    b = 2 if parity == 0 else 3
    while True:
        lam = (b / 2.0) * (1 - b / 2.0)
        if lam < lam_min:
            return out
        out.append(lam)
        b += 2


def endpoint_admissible(lam: float, parity: int = None,
                        tol: float = 1e-9) -> bool:
    """A fixed box endpoint in lambda must avoid the discrete spectrum
    values (b/2)(1-b/2)."""
    parities = (0, 1) if parity is None else (parity,)
    for par in parities:
        for pt in discrete_lambda_points(par, lam - 1.0):
            if abs(lam - pt) <= tol:
                return False
    return True


def check_thm_conditions(fam, t_grid, params: AnalysisParams = None,
                         gamma: float = 0.1, alpha: float = 0.4,
                         fixed_endpoints=()) -> dict:
    """Condition report for a box-type family along a t grid.

    Checks: the ratio nv_rho(C_t+) nv_{-A}(C_t-) / nv_1(C_t) decays (with
    its fitted log-log exponent); every side length stays above
    sigma(t) = gamma * (|log m_rho(C_t)|)^{-alpha} with alpha < 1/2; and any
    fixed lambda endpoints avoid the discrete spectrum values.
    """
    if params is None:
        params = AnalysisParams()
    t_grid = list(t_grid)
    if len(t_grid) < 3:
        raise ValueError("need at least 3 grid points")
    ms, min_sides = [], []
    for t in t_grid:
        region = fam.instance(t).product
        ms.append(m_rho(region, None, params))
        sides = [hi - lo for f in region.factors for lo, hi in f.im]
        min_sides.append(min(sides) if sides else math.inf)
    slope = float(np.polyfit(np.log(t_grid), np.log(ms), 1)[0])
    o_ok = slope < 0 and ms[-1] < ms[0]
    report = {
        "o_condition": {"pass": bool(o_ok), "exponent": slope,
                        "m_rho": ms},
    }
    if alpha >= 0.5 or alpha <= 0:
        report["sigma_condition"] = {
            "pass": False, "reason": "alpha must lie in (0, 1/2)"}
    else:
        sig = [gamma * abs(math.log(m)) ** (-alpha) for m in ms]
        ok = all(s >= st for s, st in zip(min_sides, sig))
        report["sigma_condition"] = {"pass": bool(ok), "sigma": sig,
                                     "min_side": min_sides}
    report["endpoint_condition"] = {
        "pass": all(endpoint_admissible(l) for l in fixed_endpoints),
        "violations": [l for l in fixed_endpoints
                       if not endpoint_admissible(l)],
    }
    report["pass"] = all(v["pass"] for k, v in report.items()
                         if isinstance(v, dict))
    return report


# --------------------------------------------------------------------------
# asymptotic-constant table for the special families
# --------------------------------------------------------------------------

def _loglog_fit(ts, vals, exponent=None):
    """Fit vals ~ const * t^exponent; if exponent is None, fit both."""
    lt, lv = np.log(ts), np.log(vals)
    if exponent is None:
        slope, intercept = np.polyfit(lt, lv, 1)
        return math.exp(intercept), float(slope)
    intercept = float(np.mean(lv - exponent * lt))
    return math.exp(intercept), float(exponent)


def _weyl1_value(F, t):
    # lambda box [-t, t]^d at a single fixed parity per place
    return field_prefactor(F) * math.prod(
        pl_lambda(0, -t, t).value for _ in range(F.d))


def _weyl2_value(F, t):
    # nested Plancherel mass of the simplex {lambda_j >= 0, sum <= t}
    def level(remaining, depth):
        if depth == F.d:
            return 1.0
        return pl_lambda(0, 0.0, remaining,
                         f=lambda lam: level(remaining - lam, depth + 1)).value

    return field_prefactor(F) * level(t, 0)


def _slant_value(F, t, a, b, c):
    # strip between the lines y = a x + b and y = a x + c over x in [t, 2t]
    def inner(x):
        v, _ = quad(lambda y: plancherel_density(0, y), a * x + b, a * x + c)
        return plancherel_density(0, x) * v

    v, _ = quad(inner, t, 2 * t, limit=200)
    return field_prefactor(F) * 4 * v


def _sphere_value(F, t, r):
    # ball of radius r around (t, 2t), counted with multiplicity 2 per
    # place and the sign choices 2^d
    m1, m2 = t, 2 * t

    def integrand(s, theta):
        x = m1 + s * math.cos(theta)
        y = m2 + s * math.sin(theta)
        return plancherel_density(0, x) * plancherel_density(0, y) * s

    v, _ = quad(lambda s: quad(lambda th: integrand(s, th),
                               0, 2 * math.pi, limit=100)[0], 0, r, limit=100)
    return field_prefactor(F) * 2 ** F.d * 2 * v


def _rectquad_value(F, t, alpha, beta):
    # lambda rectangle [alpha, beta] x [0, sqrt(t)], continuous mass only
    v1, _ = quad(lambda lam: math.tanh(math.pi * math.sqrt(lam - 0.25)),
                 alpha, beta, limit=200)
    return field_prefactor(F) * v1 * pl_lambda(0, 0.0, math.sqrt(t)).value


def family_asymptotic_table(name: str, F: QuadField, t_grid,
                            **kw) -> dict:
    """Fitted (constant, exponent) of the main term along the grid, against
    the closed-form leading asymptotics.

    Rows: weyl1, weyl2, slant, sphere, sector, rectquad, holo.  The sector
    row compares the reference measure V_1 (no field factor); holo is an
    exact algebraic identity evaluated at the grid points.
    """
    t_grid = list(t_grid)
    if len(t_grid) < 3:
        raise ValueError("need at least 3 grid points")
    d, sqD = F.d, math.sqrt(abs(F.discriminant))
    if name == "weyl1":
        vals = [_weyl1_value(F, t) for t in t_grid]
        target_c, target_e = 2 * sqD / math.pi ** d, float(d)
    elif name == "weyl2":
        vals = [_weyl2_value(F, t) for t in t_grid]
        target_c = 2 * sqD / (math.factorial(d) * (2 * math.pi) ** d)
        target_e = float(d)
    elif name == "slant":
        a, b, c = kw.get("a", 1.0), kw.get("b", 0.0), kw.get("c", 1.0)
        vals = [_slant_value(F, t, a, b, c) for t in t_grid]
        target_c, target_e = 14 / (3 * math.pi ** 2) * sqD * a * (c - b), 3.0
    elif name == "sphere":
        r = kw.get("r", 1.0)
        vals = [_sphere_value(F, t, r) for t in t_grid]
        # m = (t, 2t): prod m_j = 2 t^2
        target_c = 4 * sqD * unit_ball_volume(d) * (r / math.pi) ** d * 2
        target_e = float(d)
    elif name == "sector":
        from .regions import family as region_family
        p, q, al = kw.get("p", 1.0), kw.get("q", 2.0), kw.get("alpha", 0.75)
        sec = region_family("sector", p=p, q=q, alpha=al)
        vals = [sec.quadrature_vc(1.0, t).value for t in t_grid]
        target_c, target_e = (q - p) / 4.0, 1 + al
    elif name == "rectquad":
        al, be = kw.get("alpha", 1.25), kw.get("beta", 9.25)
        vals = [_rectquad_value(F, t, al, be) for t in t_grid]
        v1, _ = quad(lambda lam: math.tanh(math.pi * math.sqrt(lam - 0.25)),
                     al, be, limit=200)
        target_c, target_e = sqD / (2 * math.pi ** 2) * v1, 0.5
    elif name == "holo":
        # singleton discrete spectrum: main term is exactly
        # 2 sqrt|D_F| / pi^d * prod p_j
        ps = kw.get("points", [2.0] * d)
        # point (b-1)/2 is an integer for odd b (parity 1), half-integer
        # for even b (parity 0)
        region = discrete_singleton(ps, parities=[1 if p == int(p) else 0
                                                  for p in ps])
        value = main_term(region, F)
        target = 2 * sqD / math.pi ** d * math.prod(ps)
        return {"family": name, "value": value, "target": target,
                "rel_deviation": abs(value / target - 1),
                "exponent": None, "target_exponent": None}
    else:
        raise ValueError(f"unknown family row {name!r}")
    const, exponent = _loglog_fit(t_grid, vals)
    const_at_e, _ = _loglog_fit(t_grid, vals, exponent=target_e)
    return {
        "family": name,
        "constant": const,
        "exponent": exponent,
        "constant_at_target_exponent": const_at_e,
        "target": target_c,
        "target_exponent": target_e,
        "rel_deviation": abs(const_at_e / target_c - 1),
        "values": vals,
    }


def eisenstein_bound(t: float, mu, q_exponent: int = 7) -> float:
    """(log(2 + sum_j |t + mu_j|))^q, the continuous-spectrum coefficient
    bound."""
    mu = np.atleast_1d(mu)
    return math.log(2 + float(np.sum(np.abs(t + mu)))) ** q_exponent


# --------------------------------------------------------------------------
# synthetic spectrum
# --------------------------------------------------------------------------

@dataclass
class SyntheticSpectrum:
    """Poisson-sampled stand-in for the cuspidal spectrum: points are
    per-place spectral parameters on the positive imaginary axis, weights
    are the |c^r|^2 surrogates."""

    points: tuple  # tuple of d-tuples of floats (|nu_j| on the axis)
    weights: tuple
    parities: tuple
    seed: int
    intensity: str = "main-term"

    def __len__(self):
        return len(self.points)


def synth_spectrum(F: QuadField, region, seed: int = 0,
                   weight_law: str = "unit") -> SyntheticSpectrum:
    """Poisson point process on a product of imaginary intervals with
    intensity equal to the main-term density (field prefactor times the
    Plancherel density, doubled per place for the two signs).

    weight_law: "unit" (all weights 1) or "lognormal" (mean-1 multiplicative
    noise), seeded and deterministic.
    """
    intervals, parities = [], []
    for f in region.factors:
        if len(f.im) != 1 or f.re or f.disc:
            raise ValueError("synthetic sampling needs a product of single "
                             "imaginary intervals")
        intervals.append(f.im[0])
        parities.append(f.parity)
    expected = main_term(region, F)
    if not math.isfinite(expected) or expected <= 0:
        raise ValueError("region must carry positive finite Plancherel mass")
    rng = np.random.default_rng(seed)
    n = rng.poisson(expected)
    pts = []
    for _ in range(n):
        coord = []
        for (a, b), par in zip(intervals, parities):
            # rejection sampling against the flat majorant of the
            # (monotone) density on [a, b]
            dmax = max(plancherel_density(par, a), plancherel_density(par, b))
            while True:
                y = rng.uniform(a, b)
                if rng.uniform(0, dmax) <= plancherel_density(par, y):
                    coord.append(y)
                    break
        pts.append(tuple(coord))
    if weight_law == "unit":
        weights = tuple(1.0 for _ in range(n))
    elif weight_law == "lognormal":
        s = 0.5
        weights = tuple(rng.lognormal(mean=-s * s / 2, sigma=s, size=n))
    else:
        raise ValueError(f"unknown weight law {weight_law!r}")
    return SyntheticSpectrum(tuple(pts), weights, tuple(parities), seed)


def _in_region(point, region) -> bool:
    for y, f in zip(point, region.factors):
        if not any(lo - 1e-12 <= y <= hi + 1e-12 for lo, hi in f.im):
            return False
    return True


def count(spectrum: SyntheticSpectrum, region=None, f=None) -> float:
    """Weighted count of spectrum points: over a region (indicator), or
    against a product test function f = (f_1, ..., f_d) evaluated at
    nu_j = i y_j."""
    if (region is None) == (f is None):
        raise ValueError("pass exactly one of region, f")
    total = 0.0
    if region is not None:
        for pt, w in zip(spectrum.points, spectrum.weights):
            if _in_region(pt, region):
                total += w
        return total
    fs = f if isinstance(f, (tuple, list)) else (f,)
    for pt, w in zip(spectrum.points, spectrum.weights):
        val = 1.0
        for y, fj in zip(pt, fs):
            val *= (fj(1j * y)).real
        total += w * val
    return total
