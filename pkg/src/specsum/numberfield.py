"""Exact arithmetic in Q and real quadratic fields.

Fields are Q (encoded by m=1) or Q(sqrt m) for squarefree m > 1.  Elements
are stored with exact rational coordinates over the integral basis (1, w),
where w = sqrt(m) for m = 2, 3 mod 4 and w = (1+sqrt(m))/2 for m = 1 mod 4.
Floating point only appears in the embeddings, which is where the analysis
layers plug in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


def _is_squarefree(m: int) -> bool:
    if m <= 0:
        return False
    d = 2
    while d * d <= m:
        if m % (d * d) == 0:
            return False
        d += 1
    return True


class QuadField:
    """Q (m=1) or the real quadratic field Q(sqrt m), m squarefree.

    w satisfies w^2 = s*w + t with (s, t) = (0, m) or (1, (m-1)/4), so
    conjugation is w -> s - w and the norm of x + y*w is x^2 + s x y - t y^2.
    """

    def __init__(self, m: int):
        if not isinstance(m, int) or m < 1 or not _is_squarefree(m):
            raise ValueError(f"m must be a squarefree positive integer, got {m!r}")
        self.m = m
        if m == 1:
            self.d = 1
            self.discriminant = 1
            self.s, self.t = 0, 0  # unused for Q
        else:
            self.d = 2
            if m % 4 == 1:
                self.discriminant = m
                self.s, self.t = 1, (m - 1) // 4
            else:
                self.discriminant = 4 * m
                self.s, self.t = 0, m
        self._sqrt_m = math.sqrt(m)

    @property
    def omega_values(self):
        """Real values of w under the d embeddings."""
        if self.d == 1:
            return (1.0,)
        if self.m % 4 == 1:
            return ((1 + self._sqrt_m) / 2, (1 - self._sqrt_m) / 2)
        return (self._sqrt_m, -self._sqrt_m)

    def __repr__(self):
        return "Q" if self.d == 1 else f"Q(sqrt {self.m})"

    def __eq__(self, other):
        return isinstance(other, QuadField) and self.m == other.m

    def __hash__(self):
        return hash(("QuadField", self.m))

    # element constructors -------------------------------------------------
    def element(self, x, y=0) -> "FieldElement":
        return FieldElement(self, Fraction(x), Fraction(y))

    def zero(self) -> "FieldElement":
        return self.element(0)

    def one(self) -> "FieldElement":
        return self.element(1)

    def omega(self) -> "FieldElement":
        if self.d == 1:
            return self.one()
        return self.element(0, 1)

    def sqrt_m_element(self) -> "FieldElement":
        """sqrt(m) as a field element: w itself, or 2w - 1 on the half-integer basis."""
        if self.d == 1:
            return self.one()
        if self.m % 4 == 1:
            return self.element(-1, 2)
        return self.element(0, 1)


@dataclass(frozen=True)
class FieldElement:
    field: QuadField
    x: Fraction
    y: Fraction

    def __post_init__(self):
        if self.field.d == 1 and self.y != 0:
            # fold y*w = y*1 into the rational coordinate
            object.__setattr__(self, "x", self.x + self.y)
            object.__setattr__(self, "y", Fraction(0))

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError("mixed fields")
            return other
        return FieldElement(self.field, Fraction(other), Fraction(0))

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.field, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, -self.x, -self.y)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        F = self.field
        # (x1 + y1 w)(x2 + y2 w) with w^2 = s w + t
        x = self.x * o.x + F.t * self.y * o.y
        y = self.x * o.y + self.y * o.x + F.s * self.y * o.y
        return FieldElement(F, x, y)

    __rmul__ = __mul__

    def conjugate(self) -> "FieldElement":
        F = self.field
        if F.d == 1:
            return self
        return FieldElement(F, self.x + F.s * self.y, -self.y)

    def norm(self) -> Fraction:
        if self.field.d == 1:
            return self.x
        F = self.field
        return self.x * self.x + F.s * self.x * self.y - F.t * self.y * self.y

    def trace(self) -> Fraction:
        if self.field.d == 1:
            return self.x
        return 2 * self.x + self.field.s * self.y

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero element")
        if self.field.d == 1:
            return FieldElement(self.field, 1 / self.x, Fraction(0))
        c = self.conjugate()
        return FieldElement(self.field, c.x / n, c.y / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def embeddings(self):
        """The d real embedding values."""
        wv = self.field.omega_values
        return tuple(float(self.x) + float(self.y) * w for w in wv)

    def __repr__(self):
        if self.field.d == 1 or self.y == 0:
            return str(self.x)
        return f"{self.x}+{self.y}*w"


def make_field(m: int) -> QuadField:
    return QuadField(m)


def embed(F: QuadField, x: FieldElement):
    return x.embeddings()


def trace_and_norm(F: QuadField, x: FieldElement):
    return x.trace(), x.norm()


def is_totally_positive(F: QuadField, x: FieldElement) -> bool:
    return all(v > 0 for v in x.embeddings())


# --------------------------------------------------------------------------
# Lattices (fractional ideals as rank-d Z-modules in HNF over (1, w))
# --------------------------------------------------------------------------

def _hnf_2x2(rows):
    """Row HNF of a 2x2 rational matrix of rank 2.

    Returns rows [[a, b], [0, d]] with a, d > 0 and 0 <= b < d ... we use the
    convention v1 = (a, b), v2 = (0, d) with a > 0, d > 0, 0 <= b < d.
    """
    # clear denominators
    from math import gcd, lcm

    den = 1
    for r in rows:
        for v in r:
            den = lcm(den, Fraction(v).denominator)
    int_rows = [[int(Fraction(v) * den) for v in r] for r in rows]
    # integer row HNF via euclidean elimination on the second column
    a1, b1 = int_rows[0]
    a2, b2 = int_rows[1]
    # make second row of form (0, d): euclid on the first column
    while a2 != 0:
        q = a1 // a2
        a1, b1, a2, b2 = a2, b2, a1 - q * a2, b1 - q * b2
    # now rows are (a1, b1), (0, b2)
    if a1 < 0:
        a1, b1 = -a1, -b1
    if b2 < 0:
        b2 = -b2
    if a1 == 0 or b2 == 0:
        raise ValueError("matrix not of full rank")
    b1 %= b2
    return [[Fraction(a1, den), Fraction(b1, den)], [Fraction(0), Fraction(b2, den)]]


class IdealLattice:
    """A rank-d Z-lattice in the field, stored in HNF over the basis (1, w).

    For d=1 the lattice is g*Z for a positive rational g.  Integral ideals
    have integer HNF entries; fractional ideals (e.g. the trace dual of O)
    have rational entries.
    """

    def __init__(self, field: QuadField, basis_rows, tag: str = "lattice"):
        self.field = field
        self.tag = tag
        if field.d == 1:
            g = abs(Fraction(basis_rows[0][0]))
            if g == 0:
                raise ValueError("degenerate lattice")
            self.rows = [[g]]
        else:
            self.rows = _hnf_2x2(basis_rows)

    @classmethod
    def from_generators(cls, field: QuadField, gens, tag: str = "lattice"):
        """Lattice spanned over Z by g and g*w for each generator g."""
        elems = []
        for g in gens:
            if not isinstance(g, FieldElement):
                g = field.element(g)
            elems.append(g)
            if field.d == 2:
                elems.append(g * field.omega())
        if field.d == 1:
            g = Fraction(0)
            for e in elems:
                g = _frac_gcd(g, abs(e.x))
            return cls(field, [[g]], tag)
        rows = [[e.x, e.y] for e in elems]
        # HNF of a stack of >2 rows: fold pairwise
        cur = rows[:2]
        cur = _hnf_2x2(cur)
        for r in rows[2:]:
            cur = _hnf_stack3(cur, r)
        return cls(field, cur, tag)

    @classmethod
    def ring_of_integers(cls, field: QuadField):
        if field.d == 1:
            return cls(field, [[Fraction(1)]], "ring-of-integers")
        return cls(field, [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]],
                   "ring-of-integers")

    @classmethod
    def principal(cls, c: FieldElement):
        F = c.field
        if c.is_zero():
            raise ValueError("zero generator")
        if F.d == 1:
            return cls(F, [[abs(c.x)]], "principal")
        cw = c * F.omega()
        return cls(F, [[c.x, c.y], [cw.x, cw.y]], "principal")

    def basis_elements(self):
        F = self.field
        if F.d == 1:
            return (F.element(self.rows[0][0]),)
        return (F.element(self.rows[0][0], self.rows[0][1]),
                F.element(self.rows[1][0], self.rows[1][1]))

    def coords_of(self, x: FieldElement):
        """Coefficients of x over the lattice basis (exact rationals)."""
        if self.field.d == 1:
            return (x.x / self.rows[0][0],)
        a, b = self.rows[0]
        _, d = self.rows[1]
        # x = u*(a,b) + v*(0,d)
        u = x.x / a
        v = (x.y - u * b) / d
        return (u, v)

    def contains(self, x: FieldElement) -> bool:
        return all(c.denominator == 1 for c in self.coords_of(x))

    def covolume(self) -> float:
        """Absolute determinant of the embedding matrix of the basis."""
        import numpy as np

        rows = [e.embeddings() for e in self.basis_elements()]
        return abs(float(np.linalg.det(np.array(rows))))

    def norm_index(self) -> Fraction:
        """Index in O as a (possibly fractional) determinant ratio."""
        if self.field.d == 1:
            return self.rows[0][0]
        return self.rows[0][0] * self.rows[1][1]

    def scaled(self, g: FieldElement, tag=None) -> "IdealLattice":
        rows = []
        for e in self.basis_elements():
            p = e * g
            rows.append([p.x, p.y] if self.field.d == 2 else [p.x])
        return IdealLattice(self.field, rows, tag or self.tag)

    def __eq__(self, other):
        return (isinstance(other, IdealLattice) and self.field == other.field
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.field, tuple(tuple(r) for r in self.rows)))

    def __repr__(self):
        return f"IdealLattice({self.field}, {self.rows}, {self.tag!r})"

    def lattice_points_in_box(self, bounds):
        """All nonzero lattice points x with |sigma_j(x)| <= T_j for each j.

        bounds: scalar or per-place sequence of positive reals.
        """
        F = self.field
        if not hasattr(bounds, "__len__"):
            bounds = [bounds] * F.d
        if any(T <= 0 for T in bounds):
            raise ValueError("box bounds must be positive")
        out = []
        if F.d == 1:
            g = self.rows[0][0]
            kmax = int(math.floor(Fraction(bounds[0]) / g)) if g != 0 else 0
            for k in range(1, kmax + 1):
                out.extend([F.element(k * g), F.element(-k * g)])
            return out
        b1, b2 = self.basis_elements()
        e1 = b1.embeddings()
        e2 = b2.embeddings()
        # loop bounds from Cramer: |u| <= (T1|e2_2| + T2|e2_1|)/|det| etc.
        det = abs(e1[0] * e2[1] - e1[1] * e2[0])
        umax = int(math.floor((bounds[0] * abs(e2[1]) + bounds[1] * abs(e2[0])) / det + 1e-9))
        vmax = int(math.floor((bounds[0] * abs(e1[1]) + bounds[1] * abs(e1[0])) / det + 1e-9))
        tol = 1e-12
        for u in range(-umax, umax + 1):
            for v in range(-vmax, vmax + 1):
                if u == 0 and v == 0:
                    continue
                s0 = u * e1[0] + v * e2[0]
                s1 = u * e1[1] + v * e2[1]
                if abs(s0) <= bounds[0] + tol and abs(s1) <= bounds[1] + tol:
                    out.append(u * b1 + v * b2)
        return out


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    from math import gcd, lcm

    if a == 0:
        return abs(b)
    if b == 0:
        return abs(a)
    den = lcm(a.denominator, b.denominator)
    return Fraction(gcd(int(a * den), int(b * den)), den)


def _hnf_stack3(two_rows, extra):
    """HNF of the lattice spanned by two HNF rows plus one extra row."""
    rows = [two_rows[0], two_rows[1], list(extra)]
    # fold: HNF(r1, r3) then combine with r2 via generators trick
    from math import lcm

    den = 1
    for r in rows:
        for v in r:
            den = lcm(den, Fraction(v).denominator)
    ints = [[int(Fraction(v) * den) for v in r] for r in rows]
    # integer HNF of 3x2 by column elimination
    import numpy as np  # noqa: F401  (kept minimal; manual elimination below)

    def hnf3(mat):
        mat = [list(r) for r in mat]
        # eliminate first column to a single pivot
        while True:
            nz = [i for i, r in enumerate(mat) if r[0] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda i: abs(mat[i][0]))
            i0 = nz[0]
            for i in nz[1:]:
                q = mat[i][0] // mat[i0][0]
                mat[i][0] -= q * mat[i0][0]
                mat[i][1] -= q * mat[i0][1]
        pivot_rows = [r for r in mat if r[0] != 0]
        rest = [r for r in mat if r[0] == 0]
        a, b = pivot_rows[0] if pivot_rows else (0, 0)
        from math import gcd

        d = 0
        for r in rest:
            d = gcd(d, r[1])
        if a < 0:
            a, b = -a, -b
        if d < 0:
            d = -d
        if a == 0 or d == 0:
            raise ValueError("rank deficient")
        b %= d
        return [[a, b], [0, d]]

    res = hnf3(ints)
    return [[Fraction(res[0][0], den), Fraction(res[0][1], den)],
            [Fraction(0), Fraction(res[1][1], den)]]


@lru_cache(maxsize=None)
def inverse_different(F: QuadField) -> IdealLattice:
    """The trace dual of O: x in O' iff Tr(x*O) is contained in Z.

    For Q this is Z; for a quadratic field it is (1/(2w - s)) * O, since
    2w - s generates the different.
    """
    O = IdealLattice.ring_of_integers(F)
    if F.d == 1:
        L = IdealLattice(F, [[Fraction(1)]], "inverse-different")
        return L
    g = F.element(-F.s, 2)  # 2w - s
    L = O.scaled(g.inverse(), tag="inverse-different")
    return L


# --------------------------------------------------------------------------
# Residue rings O/(c)
# --------------------------------------------------------------------------

class ResidueRing:
    """The finite ring O/(c) with explicit representatives.

    Representatives are i + j*w with 0 <= i < a, 0 <= j < d where the
    principal lattice (c) has HNF rows [[a, b], [0, d]]; there are
    a*d = |N(c)| of them.
    """

    def __init__(self, F: QuadField, c: FieldElement):
        if not isinstance(c, FieldElement):
            c = F.element(c)
        if c.is_zero():
            raise ValueError("modulus must be nonzero")
        if not c.is_integral():
            raise ValueError("modulus must be integral")
        self.field = F
        self.modulus = c
        self.lattice = IdealLattice.principal(c)
        if F.d == 1:
            self._a = int(self.lattice.rows[0][0])
            self._b = 0
            self._d = 1
        else:
            self._a = int(self.lattice.rows[0][0])
            self._b = int(self.lattice.rows[0][1])
            self._d = int(self.lattice.rows[1][1])
        self.size = self._a * self._d
        assert self.size == abs(c.norm()), "residue count must equal |N(c)|"
        self._inv_table = None

    def representatives(self):
        F = self.field
        if F.d == 1:
            return [F.element(i) for i in range(self._a)]
        return [F.element(i, j) for j in range(self._d) for i in range(self._a)]

    def reduce(self, x: FieldElement) -> FieldElement:
        """Canonical representative of x mod (c)."""
        F = self.field
        if not x.is_integral():
            raise ValueError("can only reduce integral elements")
        if F.d == 1:
            return F.element(int(x.x) % self._a)
        i, j = int(x.x), int(x.y)
        # reduce the 1-coordinate with v1 = (a, b), then the w-coordinate
        # with v2 = (0, d)
        q = i // self._a
        i -= q * self._a
        j -= q * self._b
        j %= self._d
        return F.element(i, j)

    def key(self, x: FieldElement):
        r = self.reduce(x)
        return (int(r.x), int(r.y))

    def _build_inverse_table(self):
        table = {}
        if self.field.d == 1:
            n = self._a
            for a in range(n):
                if math.gcd(a, n) == 1:
                    table[(a, 0)] = self.field.element(pow(a, -1, n))
            self._inv_table = table
            return
        reps = self.representatives()
        one = self.field.one()
        onek = self.key(one)
        for a in reps:
            for b in reps:
                if self.key(a * b) == onek:
                    table[self.key(a)] = b
        self._inv_table = table

    def is_invertible(self, a: FieldElement) -> bool:
        if self._inv_table is None:
            self._build_inverse_table()
        return self.key(a) in self._inv_table

    def inverse_mod(self, a: FieldElement) -> FieldElement:
        if self._inv_table is None:
            self._build_inverse_table()
        k = self.key(a)
        if k not in self._inv_table:
            raise ValueError(f"{a!r} is not invertible mod {self.modulus!r}")
        return self._inv_table[k]

    def units(self):
        if self._inv_table is None:
            self._build_inverse_table()
        F = self.field
        return [F.element(k[0], k[1]) for k in sorted(self._inv_table)]


@lru_cache(maxsize=4096)
def _residue_ring_cached(F: QuadField, c: FieldElement) -> ResidueRing:
    return ResidueRing(F, c)


def residue_ring(F: QuadField, c) -> ResidueRing:
    if not isinstance(c, FieldElement):
        c = F.element(c)
    return _residue_ring_cached(F, c)
