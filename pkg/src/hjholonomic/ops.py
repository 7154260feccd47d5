"""The noncommutative operator ring R(z)<d>.

Operators are kept in left-normal form: every term is a rational-function
coefficient times a monomial in the commuting derivations d_1..d_{2n}.
The only noncommutativity is the Leibniz rule d_i c = c d_i + dc/dz_i.

Includes normal-form reduction, Buchberger's algorithm for left ideals,
and the standard-monomial / zero-dimensionality machinery.
"""

from __future__ import annotations

import itertools

from .errors import NotZeroDimensional, ResourceLimit
from .orders import TermOrder, divides, exp_add, exp_lcm, exp_sub, unit_exp
from .ring import Context, RationalFunction


class DiffOperator:
    """Element of R(z)<d> as {exponent tuple -> nonzero coefficient}."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: Context, terms=None):
        self.ctx = ctx
        clean = {}
        for alpha, c in (terms or {}).items():
            if not isinstance(c, RationalFunction):
                c = ctx.rational(c)
            if not c.is_zero:
                clean[tuple(alpha)] = c
        self.terms = clean

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, ctx: Context) -> "DiffOperator":
        return cls(ctx)

    @classmethod
    def one(cls, ctx: Context) -> "DiffOperator":
        return cls(ctx, {(0,) * ctx.nz: ctx.one})

    @classmethod
    def partial(cls, ctx: Context, i: int, k: int = 1) -> "DiffOperator":
        return cls(ctx, {unit_exp(ctx.nz, i, k): ctx.one})

    @classmethod
    def monomial(cls, ctx: Context, alpha, coeff=1) -> "DiffOperator":
        return cls(ctx, {tuple(alpha): ctx.rational(coeff)})

    @classmethod
    def from_coefficient(cls, c: RationalFunction) -> "DiffOperator":
        return cls(c.ctx, {(0,) * c.ctx.nz: c})

    # -- basic structure ----------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        if self.is_zero:
            return -1
        return max(sum(a) for a in self.terms)

    def lm(self, order: TermOrder):
        if self.is_zero:
            raise ValueError("zero operator has no leading monomial")
        return max(self.terms, key=order.key)

    def lc(self, order: TermOrder) -> RationalFunction:
        return self.terms[self.lm(order)]

    def monic(self, order: TermOrder) -> "DiffOperator":
        c = self.lc(order)
        return self.scale(self.ctx.one / c)

    def coefficient(self, alpha) -> RationalFunction:
        return self.terms.get(tuple(alpha), self.ctx.zero)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, self.ctx.zero) + c
        return DiffOperator(self.ctx, terms)

    def __sub__(self, other: "DiffOperator") -> "DiffOperator":
        return self + (-other)

    def __neg__(self) -> "DiffOperator":
        return DiffOperator(self.ctx, {a: -c for a, c in self.terms.items()})

    def scale(self, c) -> "DiffOperator":
        """Left multiplication by a coefficient function."""
        c = self.ctx.rational(c)
        return DiffOperator(self.ctx, {a: c * v for a, v in self.terms.items()})

    def _apply_partial(self, i: int) -> "DiffOperator":
        """Left-compose with a single derivation d_i."""
        terms = {}

        def acc(alpha, c):
            if alpha in terms:
                terms[alpha] = terms[alpha] + c
            else:
                terms[alpha] = c

        for alpha, c in self.terms.items():
            acc(exp_add(alpha, unit_exp(self.ctx.nz, i)), c)
            dc = c.diff(i)
            if not dc.is_zero:
                acc(alpha, dc)
        return DiffOperator(self.ctx, terms)

    def __mul__(self, other: "DiffOperator") -> "DiffOperator":
        """Ring product, left-normal form of self o other."""
        if self.ctx is not other.ctx:
            raise ValueError("operators from different contexts")
        result = DiffOperator.zero(self.ctx)
        for alpha, c in self.terms.items():
            part = other
            for i, k in enumerate(alpha):
                for _ in range(k):
                    part = part._apply_partial(i)
            result = result + part.scale(c)
        return result

    def __eq__(self, other):
        return isinstance(other, DiffOperator) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- misc ---------------------------------------------------------
    def clear_content(self) -> "DiffOperator":
        """Multiply by a unit of R(z) so coefficients become polynomials
        with no common factor; tames coefficient swell in reductions."""
        if self.is_zero:
            return self
        ctx = self.ctx
        den_lcm = None
        for c in self.terms.values():
            d = c.denom
            den_lcm = d if den_lcm is None else den_lcm.lcm(d)
        scaled = self.scale(den_lcm.as_rational())
        num_gcd = None
        for c in scaled.terms.values():
            m = c.numer
            num_gcd = m if num_gcd is None else num_gcd.gcd(m)
        return scaled.scale(ctx.one / num_gcd.as_rational())

    def to_text(self) -> str:
        """Deterministic text form, e.g. "p1*dp1 - 1"."""
        if self.is_zero:
            return "0"
        names = ["dx%d" % (i + 1) for i in range(self.ctx.n)]
        names += ["dp%d" % (i + 1) for i in range(self.ctx.n)]
        parts = []
        for alpha in sorted(self.terms, reverse=True):
            c = self.terms[alpha]
            mono = "*".join(
                (names[i] if k == 1 else "%s^%d" % (names[i], k))
                for i, k in enumerate(alpha) if k
            )
            cs = str(c)
            if mono:
                piece = mono if cs == "1" else ("-" + mono if cs == "-1" else "(%s)*%s" % (cs, mono))
            else:
                piece = cs if c.is_constant else "(%s)" % cs
            parts.append(piece)
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def __repr__(self):
        return "DiffOperator(%s)" % self.to_text()


class OperatorIdeal:
    """A left ideal given by generators plus a term order."""

    def __init__(self, generators, term_order: TermOrder):
        gens = [g for g in generators if not g.is_zero]
        if not gens:
            raise ValueError("ideal needs at least one nonzero generator")
        self.generators = gens
        self.term_order = term_order
        self.ctx = gens[0].ctx


class GroebnerBasis:
    def __init__(self, elements, term_order: TermOrder):
        self.elements = list(elements)
        self.term_order = term_order
        self.ctx = elements[0].ctx
        self.staircase = tuple(g.lm(term_order) for g in self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


def reduce(P: DiffOperator, G, order: TermOrder) -> DiffOperator:
    """Normal form of P modulo the left module generated by G.

    Deterministic: always rewrites the largest reducible monomial, using
    the first reducer in G order.
    """
    G = [g for g in G if not g.is_zero]
    if not G:
        raise ValueError("empty reducer set")
    lms = [(g.lm(order), g) for g in G]
    remainder = DiffOperator.zero(P.ctx)
    work = P
    while not work.is_zero:
        alpha = work.lm(order)
        c = work.terms[alpha]
        reducer = None
        for lm_g, g in lms:
            if divides(lm_g, alpha):
                reducer = (lm_g, g)
                break
        if reducer is None:
            remainder = remainder + DiffOperator.monomial(work.ctx, alpha, c)
            work = work - DiffOperator.monomial(work.ctx, alpha, c)
            continue
        lm_g, g = reducer
        shift = DiffOperator.monomial(work.ctx, exp_sub(alpha, lm_g))
        shifted = shift * g
        factor = c / shifted.terms[alpha]
        work = work - shifted.scale(factor)
    return remainder


def _spair(f, g, order: TermOrder) -> DiffOperator:
    lmf, lmg = f.lm(order), g.lm(order)
    gamma = exp_lcm(lmf, lmg)
    lf = (DiffOperator.monomial(f.ctx, exp_sub(gamma, lmf)) * f)
    lg = (DiffOperator.monomial(g.ctx, exp_sub(gamma, lmg)) * g)
    return lf.scale(f.ctx.one / lf.terms[gamma]) - lg.scale(g.ctx.one / lg.terms[gamma])


def buchberger(I: OperatorIdeal, max_pairs: int = 10000, max_degree: int = 40) -> GroebnerBasis:
    """Reduced Groebner basis of a left ideal.

    The coprime-leading-monomial shortcut is deliberately NOT used: with
    rational-function coefficients an S-pair of operators with coprime
    leading monomials can still reduce to something nonzero (e.g.
    <dx - c(x,y), dy - e(x,y)> with incompatible c, e), so every pair is
    processed.
    """
    order = I.term_order
    basis = [g.clear_content() for g in I.generators]
    pairs = [(i, j) for i in range(len(basis)) for j in range(i)]
    processed = 0
    while pairs:
        # normal selection: smallest lcm in the term order
        pairs.sort(key=lambda ij: order.key(exp_lcm(basis[ij[0]].lm(order), basis[ij[1]].lm(order))))
        i, j = pairs.pop(0)
        processed += 1
        if processed > max_pairs:
            raise ResourceLimit("S-pair budget exceeded (%d)" % max_pairs)
        s = _spair(basis[i], basis[j], order)
        if s.is_zero:
            continue
        r = reduce(s, basis, order)
        if r.is_zero:
            continue
        if r.order() > max_degree:
            raise ResourceLimit("degree budget exceeded (%d)" % max_degree)
        r = r.clear_content()
        basis.append(r)
        pairs.extend((len(basis) - 1, k) for k in range(len(basis) - 1))
    return _interreduce(basis, order)


def _interreduce(basis, order: TermOrder) -> GroebnerBasis:
    # drop elements whose leading monomial is divisible by another's
    basis = sorted(basis, key=lambda g: order.key(g.lm(order)))
    kept = []
    for g in basis:
        lm = g.lm(order)
        if any(divides(h.lm(order), lm) for h in kept):
            continue
        kept.append(g)
    # fully reduce each element against the others
    out = []
    for i, g in enumerate(kept):
        others = kept[:i] + kept[i + 1:]
        if others:
            g = reduce(g, others, order)
        if g.is_zero:
            continue
        out.append(g.monic(order))
    out.sort(key=lambda g: order.key(g.lm(order)))
    return GroebnerBasis(out, order)


def ideal_membership(P: DiffOperator, G: GroebnerBasis) -> bool:
    return reduce(P, G.elements, G.term_order).is_zero


def staircase_bounds(leading, nvars: int):
    """Per-variable pure-power bounds of a zero-dimensional staircase."""
    bounds = []
    missing = []
    for i in range(nvars):
        pure = [a[i] for a in leading if all(e == 0 for j, e in enumerate(a) if j != i)]
        if not pure:
            missing.append(i)
        else:
            bounds.append(min(pure))
    if missing:
        raise NotZeroDimensional(missing)
    return bounds


def standard_monomials(G: GroebnerBasis):
    """All exponents outside the staircase, ascending in the term order."""
    order = G.term_order
    nvars = G.ctx.nz
    leading = G.staircase
    bounds = staircase_bounds(leading, nvars)
    out = []
    for alpha in itertools.product(*(range(b) for b in bounds)):
        if not any(divides(lm, alpha) for lm in leading):
            out.append(alpha)
    out.sort(key=order.key)
    return out
