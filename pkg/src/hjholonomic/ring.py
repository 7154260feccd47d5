"""Exact coefficient arithmetic.

The symbolic stage of the pipeline works over the fraction field
R = Q(x_1..x_n, p_1..p_n, params): multivariate rational functions with
exact rational coefficients.  The heavy lifting (canonical forms, gcd
cancellation, term ordering) is delegated to sympy's sparse polynomial
rings; this module fixes the variable conventions and the numeric
evaluation semantics on top of them.

Variable layout: positions 0..n-1 are x_1..x_n, positions n..2n-1 are
p_1..p_n, and any free parameters (e.g. "a", "b") come after.  Only the
first 2n positions carry derivations.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import sympy
from sympy.polys.domains import QQ
from sympy.polys.fields import field

from .errors import SingularPoint, ZeroDenominator

DEFAULT_SINGULAR_TOL = 1e-12


class Context:
    """Variable context shared by every symbolic object of one problem."""

    def __init__(self, n: int, params: tuple[str, ...] = ()):
        if n < 1:
            raise ValueError("need n >= 1")
        self.n = n
        self.nz = 2 * n
        self.params = tuple(params)
        self.zvar_names = tuple(
            ["x%d" % (i + 1) for i in range(n)] + ["p%d" % (i + 1) for i in range(n)]
        )
        for name in self.params:
            if name in self.zvar_names:
                raise ValueError("parameter name %r collides with a state variable" % name)
        self.all_names = self.zvar_names + self.params
        built = field(",".join(self.all_names), QQ, order="grevlex")
        self.field = built[0]
        self._gens = built[1:]
        self.symbols = sympy.symbols(self.all_names)
        self._by_name = dict(zip(self.all_names, self._gens))

    # -- constructors -------------------------------------------------
    def rational(self, obj) -> "RationalFunction":
        """Coerce numbers, strings, sympy expressions into the field."""
        if isinstance(obj, RationalFunction):
            if obj.ctx is not self:
                raise ValueError("value belongs to a different context")
            return obj
        if isinstance(obj, (int, Fraction)):
            q = QQ(obj.numerator, obj.denominator) if isinstance(obj, Fraction) else QQ(obj)
            return RationalFunction(self, self.field.ground_new(q))
        if isinstance(obj, str):
            obj = sympy.sympify(obj, rational=True)
        if isinstance(obj, sympy.Basic):
            return RationalFunction(self, self.field.from_expr(obj))
        return RationalFunction(self, self.field(obj))

    @property
    def zero(self) -> "RationalFunction":
        return self.rational(0)

    @property
    def one(self) -> "RationalFunction":
        return self.rational(1)

    def var(self, i: int) -> "RationalFunction":
        """The i-th state variable (0-based over x_1..x_n,p_1..p_n)."""
        return RationalFunction(self, self._gens[i])

    def param(self, name: str) -> "RationalFunction":
        if name not in self.params:
            raise KeyError(name)
        return RationalFunction(self, self._by_name[name])

    def poly(self, obj) -> "Poly":
        rf = self.rational(obj)
        if not rf.f.denom.is_one:
            raise ValueError("not a polynomial: %s" % rf)
        return Poly(self, rf.f.numer)

    def from_text(self, text: str) -> "RationalFunction":
        return self.rational(text)

    def __repr__(self):
        return "Context(n=%d, params=%r)" % (self.n, self.params)


class Poly:
    """Polynomial wrapper (numerators, denominators, singular loci)."""

    __slots__ = ("ctx", "p")

    def __init__(self, ctx: Context, p):
        self.ctx = ctx
        self.p = p

    @property
    def is_zero(self) -> bool:
        return not self.p

    @property
    def is_one(self) -> bool:
        return self.p.is_one

    def monic(self) -> "Poly":
        if not self.p:
            return self
        return Poly(self.ctx, self.p.monic())

    def gcd(self, other: "Poly") -> "Poly":
        return Poly(self.ctx, self.p.gcd(other.p)).monic()

    def lcm(self, other: "Poly") -> "Poly":
        if self.is_zero or other.is_zero:
            return Poly(self.ctx, self.ctx.field.ring.zero)
        return Poly(self.ctx, self.p.lcm(other.p)).monic()

    def as_rational(self) -> "RationalFunction":
        return RationalFunction(self.ctx, self.ctx.field.new(self.p, self.ctx.field.ring.one))

    def as_expr(self):
        return self.p.as_expr()

    def degree(self) -> int:
        if self.is_zero:
            return -1
        return max(sum(mono) for mono, _ in self.p.terms())

    def __mul__(self, other):
        return Poly(self.ctx, self.p * other.p)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.p == other.p

    def __hash__(self):
        return hash(self.p)

    def __str__(self):
        return str(self.p)

    def __repr__(self):
        return "Poly(%s)" % self.p


class RationalFunction:
    """Element of the coefficient field, always in reduced canonical form."""

    __slots__ = ("ctx", "f")

    def __init__(self, ctx: Context, f):
        self.ctx = ctx
        self.f = f

    # -- structure ----------------------------------------------------
    @property
    def numer(self) -> Poly:
        return Poly(self.ctx, self.f.numer)

    @property
    def denom(self) -> Poly:
        return Poly(self.ctx, self.f.denom)

    @property
    def is_zero(self) -> bool:
        return not self.f

    @property
    def is_constant(self) -> bool:
        return self.f.denom.is_ground and self.f.numer.is_ground

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        return self.ctx.rational(other)

    def __add__(self, other):
        return RationalFunction(self.ctx, self.f + self._coerce(other).f)

    __radd__ = __add__

    def __sub__(self, other):
        return RationalFunction(self.ctx, self.f - self._coerce(other).f)

    def __rsub__(self, other):
        return RationalFunction(self.ctx, self._coerce(other).f - self.f)

    def __mul__(self, other):
        return RationalFunction(self.ctx, self.f * self._coerce(other).f)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.is_zero:
            raise ZeroDenominator("division by zero rational function")
        return RationalFunction(self.ctx, self.f / other.f)

    def __rtruediv__(self, other):
        if self.is_zero:
            raise ZeroDenominator("division by zero rational function")
        return RationalFunction(self.ctx, self._coerce(other).f / self.f)

    def __pow__(self, k: int):
        return RationalFunction(self.ctx, self.f ** k)

    def __neg__(self):
        return RationalFunction(self.ctx, -self.f)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ctx.rational(other)
        return isinstance(other, RationalFunction) and self.f == other.f

    def __hash__(self):
        return hash(self.f)

    # -- calculus -----------------------------------------------------
    def diff(self, i: int) -> "RationalFunction":
        """Partial derivative with respect to the i-th state variable."""
        return RationalFunction(self.ctx, self.f.diff(self.ctx._gens[i]))

    # -- evaluation ---------------------------------------------------
    def as_expr(self):
        return self.f.as_expr()

    def eval(self, point: "NumPoint", tol: float = DEFAULT_SINGULAR_TOL):
        """Numeric value at a point; raises SingularPoint near poles.

        The denominator is compared against the same polynomial with
        absolute coefficients evaluated at |z|, which makes the pole
        tolerance scale-free.
        """
        subs = point.substitutions(self.ctx)
        num = _eval_poly_num(self.f.numer, subs)
        den = _eval_poly_num(self.f.denom, subs)
        scale = _eval_poly_abs(self.f.denom, subs)
        if abs(den) <= tol * max(1.0, abs(scale)):
            raise SingularPoint("denominator %s vanishes at %s" % (self.f.denom, point))
        return num / den

    def eval_exact(self, values: dict[str, Fraction]) -> Fraction:
        """Exact evaluation at a rational point (all variables bound)."""
        subs = [
            (self.ctx._by_name[name].numer, QQ(v.numerator, v.denominator))
            for name, v in values.items()
        ]
        num = self.f.numer.evaluate(subs)
        den = self.f.denom.evaluate(subs)
        if not den:
            raise SingularPoint("exact evaluation hit a pole")
        q = QQ(num) / QQ(den)
        return Fraction(int(q.numerator), int(q.denominator))

    def __str__(self):
        return str(self.f)

    def __repr__(self):
        return "RationalFunction(%s)" % self.f


def _eval_poly_num(p, subs):
    total = mpmath.mpf(0) if any(isinstance(v, mpmath.mpf) for v in subs.values()) else 0.0
    for mono, coeff in p.terms():
        term = mpmath.mpf(int(coeff.numerator)) / int(coeff.denominator) \
            if isinstance(total, mpmath.mpf) else float(Fraction(int(coeff.numerator), int(coeff.denominator)))
        for e, v in zip(mono, subs.values()):
            if e:
                term = term * v ** e
        total = total + term
    return total


def _eval_poly_abs(p, subs):
    total = 0.0
    for mono, coeff in p.terms():
        term = abs(float(Fraction(int(coeff.numerator), int(coeff.denominator))))
        for e, v in zip(mono, subs.values()):
            if e:
                term *= abs(float(v)) ** e
        total += term
    return total


class NumPoint:
    """A numeric point z = (x, p) plus numeric parameter bindings."""

    __slots__ = ("coords", "params")

    def __init__(self, coords, params=None):
        self.coords = tuple(coords)
        self.params = dict(params or {})
        for c in self.coords:
            if not mpmath.isfinite(mpmath.mpf(c) if not isinstance(c, (int, float)) else c):
                raise ValueError("non-finite coordinate %r" % (c,))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def substitutions(self, ctx: Context) -> dict:
        if self.dim != ctx.nz:
            raise ValueError("point dimension %d, context expects %d" % (self.dim, ctx.nz))
        subs = {name: v for name, v in zip(ctx.zvar_names, self.coords)}
        for name in ctx.params:
            if name not in self.params:
                raise ValueError("missing numeric value for parameter %r" % name)
            subs[name] = self.params[name]
        return subs

    def replace(self, coords=None, params=None) -> "NumPoint":
        return NumPoint(coords if coords is not None else self.coords,
                        params if params is not None else self.params)

    def __iter__(self):
        return iter(self.coords)

    def __eq__(self, other):
        return (isinstance(other, NumPoint) and self.coords == other.coords
                and self.params == other.params)

    def __repr__(self):
        return "NumPoint(%s, params=%r)" % (list(self.coords), self.params)


# -- spec-level operation aliases -------------------------------------

def poly_gcd(f: Poly, g: Poly) -> Poly:
    return f.gcd(g)


def rf_normalize(num: Poly, den: Poly) -> RationalFunction:
    if den.is_zero:
        raise ZeroDenominator("zero denominator")
    ctx = num.ctx
    return RationalFunction(ctx, ctx.field.new(num.p, den.p))


def rf_diff(f: RationalFunction, i: int) -> RationalFunction:
    return f.diff(i)


def rf_eval(f: RationalFunction, z: NumPoint, tol: float = DEFAULT_SINGULAR_TOL):
    return f.eval(z, tol)
