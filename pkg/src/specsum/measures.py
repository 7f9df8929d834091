"""Spectral measures: Plancherel density, reference measures, Monte Carlo.

All measures act on per-place factors of product regions in the spectral
set (0, infinity) union i[0, infinity).  Imaginary intervals i[a,b] are
stored as real pairs (a, b); real intervals live in (0, nu_theta] where
nu_theta = sqrt(1/4 - lambda_star) bounds the exceptional spectral
parameters; discrete points are positive half-integers or integers
matching the place parity.

The lambda-coordinate is lambda = 1/4 - nu^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

LAMBDA_STAR_DEFAULT = 77.0 / 324.0


def nu_theta(lambda_star: float = LAMBDA_STAR_DEFAULT) -> float:
    """Upper bound of the complementary-series branch."""
    return math.sqrt(0.25 - lambda_star)


@dataclass
class MeasureResult:
    value: float
    error: float
    method: str  # closed-form | quadrature | monte-carlo
    detail: int = 0  # node or sample count

    def __float__(self):
        return float(self.value)


def _combine(results, method=None):
    """Product of per-place MeasureResults with first-order error propagation."""
    value = 1.0
    for r in results:
        value *= r.value
    err = 0.0
    for r in results:
        rest = 1.0
        for s in results:
            if s is not r:
                rest *= abs(s.value)
        err += r.error * rest
    meth = method or ("closed-form" if all(r.method == "closed-form" for r in results)
                      else "quadrature")
    return MeasureResult(value, err, meth, sum(r.detail for r in results))


# --------------------------------------------------------------------------
# Plancherel density in the nu coordinate
# --------------------------------------------------------------------------

def plancherel_density(parity: int, t: float) -> float:
    """Continuous Plancherel weight at nu = it (t >= 0)."""
    t = abs(t)
    if parity == 0:
        return t * math.tanh(math.pi * t)
    if t == 0:
        return 1.0 / math.pi
    return t / math.tanh(math.pi * t)


def discrete_admissible(parity: int, beta: float, tol: float = 1e-9) -> bool:
    """True iff beta lies in (parity+1)/2 + N0 (the discrete-series points)."""
    base = (parity + 1) / 2.0
    if beta < base - tol:
        return False
    k = round(beta - base)
    return abs(beta - base - k) <= tol


def discrete_plancherel_weight(parity: int, beta: float) -> float:
    """|beta| at admissible points, else 0."""
    return abs(beta) if discrete_admissible(parity, beta) else 0.0


def npl_factor(factor) -> MeasureResult:
    """One-place Plancherel measure: 2*integral + 2*sum over the factor."""
    parity = factor.parity
    total = 0.0
    err = 0.0
    nodes = 0
    for a, b in factor.im:
        v, e = quad(lambda t: plancherel_density(parity, t), a, b, limit=200)
        total += 2 * v
        err += 2 * e
        nodes += 50
    # real (complementary) intervals carry zero Plancherel mass
    for beta in factor.disc:
        total += 2 * discrete_plancherel_weight(parity, beta)
    return MeasureResult(total, err, "quadrature", nodes)


def npl(region) -> MeasureResult:
    return _combine([npl_factor(f) for f in region.factors], method="quadrature")


# --------------------------------------------------------------------------
# reference measures nv_b
# --------------------------------------------------------------------------

def _power_integral(lo: float, hi: float, b: float) -> float:
    """integral of t^b over [lo, hi], 0 <= lo <= hi."""
    if hi <= lo:
        return 0.0
    if abs(b + 1) < 1e-14:
        return math.log(hi / lo)
    if lo > 0 and (hi - lo) < 0.1 * lo:
        # stable form for relatively thin intervals, where the naive
        # difference of powers loses digits to cancellation
        return lo ** (b + 1) * math.expm1((b + 1) * math.log1p((hi - lo) / lo)) \
            / (b + 1)
    return (hi ** (b + 1) - lo ** (b + 1)) / (b + 1)


def nv_b_factor(b: float, factor, lambda_star: float = LAMBDA_STAR_DEFAULT) -> MeasureResult:
    """One-place reference measure with weight p(q)^b.

    p(q) = 1 on (0, nu_theta] and i[0,1), |q| elsewhere; the base measure is
    dt on the imaginary axis, dx on the complementary interval, and counting
    measure on the discrete points.
    """
    total = 0.0
    for a, hi in factor.im:
        a = max(a, 0.0)
        if hi <= a:
            continue
        flat_hi = min(hi, 1.0)
        if flat_hi > a:
            total += flat_hi - a
        lo = max(a, 1.0)
        if hi > lo:
            total += _power_integral(lo, hi, b)
    nth = nu_theta(lambda_star)
    for lo, hi in factor.re:
        lo = max(lo, 0.0)
        hi = min(hi, nth)
        if hi > lo:
            total += hi - lo
    for beta in factor.disc:
        total += abs(beta) ** b
    return MeasureResult(total, 1e-14 * abs(total), "closed-form", 0)


def nv_b(b: float, region, lambda_star: float = LAMBDA_STAR_DEFAULT) -> MeasureResult:
    return _combine([nv_b_factor(b, f, lambda_star) for f in region.factors])


def nv_1(region, lambda_star: float = LAMBDA_STAR_DEFAULT) -> MeasureResult:
    return nv_b(1.0, region, lambda_star)


# --------------------------------------------------------------------------
# measures in the lambda coordinate
# --------------------------------------------------------------------------

def pl_lambda(parity: int, lam_lo: float, lam_hi: float, f=None,
              discrete_lambdas=()) -> MeasureResult:
    """Plancherel measure pl_parity of f over [lam_lo, lam_hi].

    Continuous part: tanh (parity 0) or coth (parity 1) of pi*sqrt(lambda-1/4)
    over the interval's intersection with (1/4, infinity), evaluated with the
    substitution lambda = 1/4 + u^2 which removes the coth endpoint
    singularity.  Discrete part: weights (b-1) at lambda = (b/2)(1-b/2) for
    b >= 2, b = parity mod 2, restricted to the interval; explicit singleton
    lambdas may be passed in discrete_lambdas.
    """
    if not (math.isfinite(lam_lo) and math.isfinite(lam_hi)):
        raise ValueError("interval must be bounded")
    if f is None:
        f = lambda lam: 1.0
    total = 0.0
    err = 0.0
    lo = max(lam_lo, 0.25)
    if lam_hi > lo:
        u0 = math.sqrt(lo - 0.25)
        u1 = math.sqrt(lam_hi - 0.25)

        def g(u):
            lam = 0.25 + u * u
            if parity == 0:
                w = math.tanh(math.pi * u) * 2 * u
            else:
                # coth(pi u) * 2u -> 2/pi at u=0
                w = 2 * u / math.tanh(math.pi * u) if u > 0 else 2 / math.pi
            return f(lam) * w

        v, e = quad(g, u0, u1, limit=200)
        total += v
        err += e
    b = 2 if parity == 0 else 3
    while True:
        lam_b = (b / 2.0) * (1 - b / 2.0)
        if lam_b < lam_lo - 1e-12:
            break
        if lam_b <= lam_hi + 1e-12:
            total += (b - 1) * f(lam_b)
        b += 2
    for lam in discrete_lambdas:
        bb = 1 + 2 * math.sqrt(0.25 - lam)  # lambda = 1/4 - ((b-1)/2)^2
        if bb >= 2 - 1e-9 and abs(round(bb) - bb) < 1e-9 and round(bb) % 2 == parity % 2:
            total += (round(bb) - 1) * f(lam)
    return MeasureResult(total, err, "quadrature", 100)


def V_b_lambda_factor(b: float, intervals, discrete_betas=(),
                      lambda_star: float = LAMBDA_STAR_DEFAULT) -> MeasureResult:
    """One-place reference measure in the lambda coordinate.

    intervals: list of (lo, hi) in lambda-space, clipped to [lambda_star, inf).
    Weight (1/2)(lambda-1/4)^{(b-1)/2} above 5/4, (1/2)|lambda-1/4|^{-1/2}
    on [lambda_star, 5/4]; discrete points beta get |beta|^b.
    """
    total = 0.0
    err = 0.0
    for lo, hi in intervals:
        lo = max(lo, lambda_star)
        if hi <= lo:
            continue
        # middle band [lambda_star, 5/4]
        m_lo, m_hi = lo, min(hi, 1.25)
        if m_hi > m_lo:
            # antiderivative of (1/2)|x-1/4|^{-1/2}: sign(x-1/4)*sqrt(|x-1/4|)
            def A(x):
                return math.copysign(math.sqrt(abs(x - 0.25)), x - 0.25)

            total += A(m_hi) - A(m_lo)
        u_lo, u_hi = max(lo, 1.25), hi
        if u_hi > u_lo:
            p = (b - 1) / 2.0
            if abs(p + 1) < 1e-14:
                total += 0.5 * (math.log(u_hi - 0.25) - math.log(u_lo - 0.25))
            else:
                total += 0.5 * ((u_hi - 0.25) ** (p + 1) - (u_lo - 0.25) ** (p + 1)) / (p + 1)
    for beta in discrete_betas:
        total += abs(beta) ** b
    return MeasureResult(total, err + 1e-14 * abs(total), "closed-form", 0)


def V_b_lambda(b: float, lambda_region,
               lambda_star: float = LAMBDA_STAR_DEFAULT) -> MeasureResult:
    """Product over places of V_b_lambda_factor.

    lambda_region: list of (intervals, discrete_betas) pairs per place.
    """
    return _combine([V_b_lambda_factor(b, iv, pts, lambda_star)
                     for iv, pts in lambda_region])


# --------------------------------------------------------------------------
# Monte-Carlo oracle
# --------------------------------------------------------------------------

def monte_carlo_measure(bbox, membership, weight=None, n_samples: int = 10 ** 5,
                        seed: int = 0, multiplicity: float = 1.0) -> MeasureResult:
    """Unbiased MC estimate of integral of weight over the region.

    bbox: list of (lo, hi) per coordinate; membership: vectorized predicate
    on an (n, d) array; weight: vectorized function on the same array (1 if
    None).  Deterministic per seed; error is 3 times the standard error.
    """
    bbox = [(float(lo), float(hi)) for lo, hi in bbox]
    vol = 1.0
    for lo, hi in bbox:
        if hi <= lo:
            raise ValueError("degenerate bounding box")
        vol *= hi - lo
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in bbox])
    highs = np.array([hi for _, hi in bbox])
    x = rng.uniform(lows, highs, size=(n_samples, len(bbox)))
    inside = np.asarray(membership(x), dtype=bool)
    vals = np.zeros(n_samples)
    if weight is None:
        vals[inside] = 1.0
    else:
        vals[inside] = np.asarray(weight(x[inside]), dtype=float)
    vals *= vol * multiplicity
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else float("inf")
    return MeasureResult(mean, 3 * stderr, "monte-carlo", n_samples)
