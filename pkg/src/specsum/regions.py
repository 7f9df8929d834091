"""Spectral-space geometry: distances, shells, bluntness, region families.

Points live per place on the two branches i[0, infinity) (principal) and
(0, nu_theta] (complementary), plus the discrete points (b-1)/2.  For all
shell/distance arithmetic the two branches are flattened isometrically onto
the real line: i t -> t >= 0 and x -> -x in [-nu_theta, 0).  On the chart
the branch distance |q - nu| / |q| + |nu| becomes plain |u - u'|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .measures import (
    LAMBDA_STAR_DEFAULT,
    MeasureResult,
    monte_carlo_measure,
    nu_theta,
    nv_b,
)


# --------------------------------------------------------------------------
# product regions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaceFactor:
    """One place of a product region.

    im: imaginary-axis intervals (a, b) meaning i[a, b]
    re: complementary intervals inside (0, nu_theta]
    disc: discrete points beta
    """

    parity: int = 0
    im: tuple = ()
    re: tuple = ()
    disc: tuple = ()


@dataclass(frozen=True)
class ProductRegion:
    factors: tuple

    @property
    def d(self):
        return len(self.factors)


def imaginary_box(intervals, parities=None) -> ProductRegion:
    if parities is None:
        parities = [0] * len(intervals)
    return ProductRegion(tuple(PlaceFactor(parity=p, im=((float(a), float(b)),))
                               for (a, b), p in zip(intervals, parities)))


def discrete_singleton(points, parities=None) -> ProductRegion:
    if parities is None:
        parities = [1 if round(2 * p) % 2 == 0 else 0 for p in points]
    factors = []
    for p, par in zip(points, parities):
        base = (par + 1) / 2.0
        if p < base - 1e-9 or abs((p - base) - round(p - base)) > 1e-9:
            raise ValueError(f"point {p} not admissible for parity {par}")
        factors.append(PlaceFactor(parity=par, disc=(float(p),)))
    return ProductRegion(tuple(factors))


# --------------------------------------------------------------------------
# distance / neighborhoods / bluntness
# --------------------------------------------------------------------------

def flatten(value, branch: str) -> float:
    """Chart coordinate: principal i|t| -> |t|, complementary x -> -x."""
    if branch == "principal":
        return abs(value)
    if branch == "complementary":
        return -abs(value)
    raise ValueError(f"unknown branch {branch!r}")


def dist(nu, q) -> float:
    """Branch distance between two per-place values.

    Each argument is (value, branch) with branch 'principal' (i t) or
    'complementary' (x in (0, nu_theta]).  Same branch: |difference|;
    across branches: sum of absolute values.  Equivalently |u - u'| on the
    flattened chart.
    """
    return abs(flatten(*nu) - flatten(*q))


def neighborhood_contains(nu_vec, eps: float, q_vec) -> bool:
    """q in A(nu, eps): every coordinate within eps/2 in branch distance."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return all(dist(n, q) <= eps / 2 + 1e-12 for n, q in zip(nu_vec, q_vec))


def bluntness_deficit(region, eps: float, n_grid: int = 9,
                      lambda_star: float = LAMBDA_STAR_DEFAULT):
    """Estimated bluntness constant w of a product region.

    For each sampled nu in the region and beta in (0, eps], compares the
    measure of A(nu, beta) intersected with the region against the
    guaranteed half-window volume (beta/2)^d, capping each per-coordinate
    ratio at 1.  A region reported with deficit about 1 retains full
    half-windows around every point; thin slabs score about
    (slab width)/(beta/2).
    """
    if not isinstance(region, ProductRegion):
        raise ValueError("bluntness_deficit expects a ProductRegion")
    intervals = []
    for f in region.factors:
        if len(f.im) != 1 or f.re or f.disc:
            raise ValueError("bluntness is computed for imaginary boxes")
        intervals.append(f.im[0])
    if any(b <= a for a, b in intervals):
        return None  # empty or degenerate: undefined
    worst = math.inf
    betas = [eps * k / 4.0 for k in range(1, 5)]
    for beta in betas:
        half = beta / 2.0
        ratio_per_place = []
        for a, b in intervals:
            place_worst = math.inf
            for i in range(n_grid):
                nu = a + (b - a) * i / (n_grid - 1)
                length = min(nu + half, b) - max(nu - half, a)
                place_worst = min(place_worst, min(1.0, length / half))
            ratio_per_place.append(place_worst)
        prod = 1.0
        for r in ratio_per_place:
            prod *= r
        worst = min(worst, prod)
    return worst


# --------------------------------------------------------------------------
# shells
# --------------------------------------------------------------------------

def shell_growth_constant(n: int):
    """R(n) = (3(1+1/e))^n and D = log R."""
    if n < 1:
        raise ValueError("need at least one place")
    R = (3.0 * (1.0 + math.exp(-1.0))) ** n
    return R, math.log(R)


def _fatten_factor(f: PlaceFactor, delta: float,
                   lambda_star: float = LAMBDA_STAR_DEFAULT) -> PlaceFactor:
    """Fatten a single-interval imaginary factor by delta on the chart."""
    (a, b), = f.im
    lo, hi = a - delta, b + delta
    nth = nu_theta(lambda_star)
    im = ((max(lo, 0.0), hi),)
    re = ()
    if lo < 0:
        re = ((0.0, min(-lo, nth)),)
    return PlaceFactor(parity=f.parity, im=im, re=re)


def _shrink_factor(f: PlaceFactor, delta: float) -> PlaceFactor:
    (a, b), = f.im
    lo, hi = a + delta, b - delta
    if hi <= lo:
        return PlaceFactor(parity=f.parity, im=())
    return PlaceFactor(parity=f.parity, im=((lo, hi),))


@dataclass
class ShellSet:
    outer: object  # C+(c)
    inner: object  # C+(-c)
    nv1_outer: float
    nv1_inner: float

    @property
    def nv1_ring(self):
        return self.nv1_outer - self.nv1_inner


def shells(region, c: float, lambda_star: float = LAMBDA_STAR_DEFAULT) -> ShellSet:
    """C+(c), C+(-c) and the reference measure of the ring C+[c].

    For products of imaginary intervals the fattening/shrinking is exact
    interval arithmetic on the flattened chart; spheres are handled
    radially in their own family code.
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    if not isinstance(region, ProductRegion):
        raise ValueError("shells() expects a ProductRegion")
    outer = ProductRegion(tuple(_fatten_factor(f, c, lambda_star)
                                for f in region.factors))
    inner = ProductRegion(tuple(_shrink_factor(f, c) for f in region.factors))
    return ShellSet(outer, inner,
                    nv_b(1.0, outer, lambda_star).value,
                    nv_b(1.0, inner, lambda_star).value)


# --------------------------------------------------------------------------
# lambda <-> nu transforms
# --------------------------------------------------------------------------

def point_to_lambda(nu_abs: float, branch: str) -> float:
    """lambda = 1/4 - nu^2 with nu = i*t (principal) or x (real branches)."""
    if branch == "principal":
        return 0.25 + nu_abs * nu_abs
    return 0.25 - nu_abs * nu_abs


def point_to_nu(lam: float):
    if lam >= 0.25:
        return math.sqrt(lam - 0.25), "principal"
    return math.sqrt(0.25 - lam), "real"


def to_lambda(region: ProductRegion):
    """lambda-space description [(intervals, discrete_betas), ...] per place."""
    out = []
    for f in region.factors:
        ivs = []
        for a, b in f.im:
            ivs.append((0.25 + a * a, 0.25 + b * b))
        for lo, hi in f.re:
            ivs.append((0.25 - hi * hi, 0.25 - lo * lo))
        out.append((ivs, tuple(f.disc)))
    return out


# --------------------------------------------------------------------------
# parametric families
# --------------------------------------------------------------------------

def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1)


@dataclass
class RegionInstance:
    """A concrete region at fixed t, ready for measuring.

    space: 'nu' (coordinates are the imaginary parts t_j >= 0) or 'lambda'.
    product: ProductRegion when the region factorizes, else None.
    membership/bbox/weight/multiplicity drive quadrature and Monte Carlo;
    weight is the reference-measure density in the given coordinates.
    """

    space: str
    product: ProductRegion = None
    bbox: list = None
    membership: object = None
    multiplicity: float = 1.0

    def weight(self, x):
        if self.space == "nu":
            return np.prod(np.maximum(np.abs(x), 1.0), axis=-1)
        return np.full(x.shape[0], 0.5 ** x.shape[1])  # lambda >= 5/4 assumed

    def mc_nv1(self, n_samples=10 ** 5, seed=0) -> MeasureResult:
        if self.membership is None:
            raise ValueError("no membership predicate; use nv_b on the product")
        return monte_carlo_measure(self.bbox, self.membership, self.weight,
                                   n_samples, seed, self.multiplicity)


class RegionFamily:
    name = None

    def instance(self, t=None) -> RegionInstance:
        raise NotImplementedError

    def closed_form_nv1(self, t=None) -> MeasureResult:
        raise NotImplementedError


class BoxFamily(RegionFamily):
    """C_t = prod_j i[a_j(t), b_j(t)] with callables or constants."""

    name = "box"

    def __init__(self, a, b, parities=None):
        self.a = a
        self.b = b
        self.parities = parities or [0] * len(a)

    def _resolve(self, t):
        a = [f(t) if callable(f) else f for f in self.a]
        b = [f(t) if callable(f) else f for f in self.b]
        if any(x < 1 or y < x for x, y in zip(a, b)):
            raise ValueError("box needs 1 <= a_j <= b_j")
        return a, b

    def instance(self, t=None) -> RegionInstance:
        a, b = self._resolve(t)
        return RegionInstance("nu", product=imaginary_box(list(zip(a, b)), self.parities))

    def closed_form_nv1(self, t=None) -> MeasureResult:
        return nv_b(1.0, self.instance(t).product)


class HypercubeFamily(BoxFamily):
    """prod_j i[a_j(t), a_j(t) + sigma]."""

    name = "hypercube"

    def __init__(self, a, sigma, parities=None):
        self.sigma = sigma
        b = []
        for f in a:
            if callable(f):
                b.append(lambda t, f=f: f(t) + sigma)
            else:
                b.append(f + sigma)
        super().__init__(a, b, parities)
        self.name = "hypercube"


class SingletonFamily(RegionFamily):
    """Discrete product point; p_j may be callables of t."""

    name = "singleton"

    def __init__(self, points, parities):
        self.points = points
        self.parities = parities

    def instance(self, t=None) -> RegionInstance:
        pts = [p(t) if callable(p) else p for p in self.points]
        return RegionInstance("nu", product=discrete_singleton(pts, self.parities))

    def closed_form_nv1(self, t=None) -> MeasureResult:
        pts = [p(t) if callable(p) else p for p in self.points]
        v = 1.0
        for p in pts:
            v *= p
        return MeasureResult(v, 0.0, "closed-form")


class SphereFamily(RegionFamily):
    """Ball of radius r around (|m_j|) in the principal coordinates.

    Counted with multiplicity 2 (the region together with its reflected
    copy under the global sign flip), which is the convention under which
    the closed form 2 v_n r^n prod |m_j| and the spectral-density constant
    for floating spheres are exact.  Requires |m_j| >= r + 1.
    """

    name = "sphere"

    def __init__(self, m, r):
        self.m = m
        self.r = r

    def _resolve(self, t):
        m = [f(t) if callable(f) else f for f in self.m]
        r = self.r(t) if callable(self.r) else self.r
        if r <= 0:
            raise ValueError("radius must be positive")
        if any(mj < r + 1 for mj in m):
            raise ValueError("sphere requires m_j >= r + 1")
        return m, r

    def instance(self, t=None) -> RegionInstance:
        m, r = self._resolve(t)
        m_arr = np.array(m)

        def member(x):
            return np.sum((x - m_arr) ** 2, axis=-1) <= r * r

        bbox = [(mj - r, mj + r) for mj in m]
        return RegionInstance("nu", bbox=bbox, membership=member, multiplicity=2.0)

    def closed_form_nv1(self, t=None) -> MeasureResult:
        m, r = self._resolve(t)
        n = len(m)
        v = 2.0 * unit_ball_volume(n) * r ** n
        for mj in m:
            v *= mj
        return MeasureResult(v, 0.0, "closed-form")

    def quadrature_nv1(self, t=None) -> MeasureResult:
        m, r = self._resolve(t)
        if len(m) == 1:
            v = ((m[0] + r) ** 2 - (m[0] - r) ** 2) / 2.0
            return MeasureResult(2 * v, 0.0, "quadrature")
        if len(m) != 2:
            raise ValueError("quadrature implemented for d <= 2")
        m1, m2 = m

        def integrand(t1):
            h = math.sqrt(max(r * r - (t1 - m1) ** 2, 0.0))
            lo, hi = m2 - h, m2 + h
            return t1 * (hi * hi - lo * lo) / 2.0

        v, e = quad(integrand, m1 - r, m1 + r, limit=400)
        return MeasureResult(2 * v, 2 * e, "quadrature", 200)

    def shells(self, c: float, t=None) -> ShellSet:
        """Radial shells: C+(c) = ball(r+c), C+(-c) = ball(r-c)."""
        m, r = self._resolve(t)
        n = len(m)
        prod_m = math.prod(m)

        def vol(radius):
            if radius <= 0:
                return 0.0
            return 2.0 * unit_ball_volume(n) * radius ** n * prod_m

        outer = SphereFamily(m, r + c)
        inner = SphereFamily(m, r - c) if r - c > 0 else None
        return ShellSet(outer, inner, vol(r + c), vol(r - c))


class SectorFamily(RegionFamily):
    """{(l1, l2): t <= l1 <= t + t^alpha, p*l1 <= l2 <= q*l1} in lambda space.

    Both bounds on l2 are proportional to l1, so the region is a genuine
    angular sector in the (l1, l2) quadrant.
    """

    name = "sector"

    def __init__(self, p, q, alpha):
        if not (0 < p < q):
            raise ValueError("need 0 < p < q")
        if not (0 < alpha <= 1):
            raise ValueError("need 0 < alpha <= 1")
        self.p, self.q, self.alpha = p, q, alpha

    def instance(self, t) -> RegionInstance:
        if t < 1.25 * (1 + 1 / self.p):
            raise ValueError("t too small for the sector family")
        p, q, al = self.p, self.q, self.alpha

        def member(x):
            l1, l2 = x[..., 0], x[..., 1]
            return (l1 >= t) & (l1 <= t + t ** al) & (l2 >= p * l1) & (l2 <= q * l1)

        bbox = [(t, t + t ** al), (p * t, q * (t + t ** al))]
        return RegionInstance("lambda", bbox=bbox, membership=member)

    def closed_form_nv1(self, t=None) -> MeasureResult:
        # leading asymptotic of the c=1 reference volume
        v = 0.25 * (self.q - self.p) * t ** (1 + self.alpha)
        return MeasureResult(v, float("nan"), "closed-form")  # asymptotic

    def closed_form_vc(self, c: float, t: float) -> MeasureResult:
        v = (1.0 / (2 * (c + 1))) * (self.q ** ((c + 1) / 2) - self.p ** ((c + 1) / 2)) \
            * t ** (c + self.alpha)
        return MeasureResult(v, float("nan"), "closed-form")

    def refined_vc(self, c: float, t: float) -> MeasureResult:
        """Same direct computation with the l1 integral kept exact.

        Identical leading term to closed_form_vc; the pure power t^{c+alpha}
        under-reports the exact volume by about (c/2) t^{alpha-1}, which at
        moderate t dwarfs every other correction.
        """
        l1_int = ((t + t ** self.alpha) ** (c + 1) - t ** (c + 1)) / (c + 1)
        v = (1.0 / (2 * (c + 1))) * (self.q ** ((c + 1) / 2) - self.p ** ((c + 1) / 2)) \
            * l1_int
        return MeasureResult(v, float("nan"), "closed-form")

    def quadrature_vc(self, c: float, t: float) -> MeasureResult:
        p, q = self.p, self.q

        def inner(l1):
            v, _ = quad(lambda l2: 0.5 * (l2 - 0.25) ** ((c - 1) / 2.0),
                        p * l1, q * l1, limit=100)
            return 0.5 * (l1 - 0.25) ** ((c - 1) / 2.0) * v

        v, e = quad(inner, t, t + t ** self.alpha, limit=200)
        return MeasureResult(v, e, "quadrature", 200)


class SlantedStripFamily(RegionFamily):
    """{i(x, y): t <= x <= 2t, a x + b <= y <= a x + c} in nu space."""

    name = "slanted-strip"

    def __init__(self, a, b, c):
        if a <= 0 or c <= b:
            raise ValueError("need a > 0 and c > b")
        self.a, self.b, self.c = a, b, c

    def instance(self, t) -> RegionInstance:
        a, b, c = self.a, self.b, self.c
        if a * t + b < 1 or t < 1:
            raise ValueError("strip must lie in (i[1,inf))^2")

        def member(x):
            x1, x2 = x[..., 0], x[..., 1]
            return (x1 >= t) & (x1 <= 2 * t) & (x2 >= a * x1 + b) & (x2 <= a * x1 + c)

        bbox = [(t, 2 * t), (a * t + b, 2 * a * t + c)]
        return RegionInstance("nu", bbox=bbox, membership=member)

    def closed_form_nv1(self, t) -> MeasureResult:
        v = (7.0 / 3.0) * self.a * (self.c - self.b) * t ** 3
        return MeasureResult(v, float("nan"), "closed-form")  # asymptotic

    def quadrature_nv1(self, t) -> MeasureResult:
        a, b, c = self.a, self.b, self.c

        def integrand(x):
            lo, hi = a * x + b, a * x + c
            return x * (hi * hi - lo * lo) / 2.0

        v, e = quad(integrand, t, 2 * t, limit=200)
        return MeasureResult(v, e, "quadrature", 100)


class SimplexFamily(RegionFamily):
    """W_n(Y) = {lambda in [5/4, inf)^n : sum lambda_j <= Y}."""

    name = "simplex"

    def __init__(self, n):
        if n < 1:
            raise ValueError("n >= 1")
        self.n = n

    def instance(self, Y) -> RegionInstance:
        n = self.n

        def member(x):
            return (np.all(x >= 1.25, axis=-1)) & (np.sum(x, axis=-1) <= Y)

        hi = max(Y - 1.25 * (n - 1), 1.25 + 1e-9)
        bbox = [(1.25, hi)] * n
        return RegionInstance("lambda", bbox=bbox, membership=member)

    def closed_form_nv1(self, Y) -> MeasureResult:
        n = self.n
        v = max(Y - 1.25 * n, 0.0) ** n / (2 ** n * math.factorial(n))
        return MeasureResult(v, 0.0, "closed-form")

    def recursion_nv1(self, Y) -> MeasureResult:
        """nv1(W_n(Y)) = (1/2) int_{5/4}^Y nv1(W_{n-1}(Y - l)) dl."""
        if self.n == 1:
            return MeasureResult(max(Y - 1.25, 0.0) / 2.0, 0.0, "closed-form")
        sub = SimplexFamily(self.n - 1)
        v, e = quad(lambda lam: sub.closed_form_nv1(Y - lam).value, 1.25, max(Y, 1.25),
                    limit=200)
        return MeasureResult(0.5 * v, 0.5 * e, "quadrature", 100)


_FAMILIES = {
    "box": BoxFamily,
    "hypercube": HypercubeFamily,
    "singleton": SingletonFamily,
    "sphere": SphereFamily,
    "sector": SectorFamily,
    "slanted-strip": SlantedStripFamily,
    "simplex": SimplexFamily,
}


def family(name: str, **params) -> RegionFamily:
    if name not in _FAMILIES:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(_FAMILIES)}")
    return _FAMILIES[name](**params)
