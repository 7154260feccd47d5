"""Pfaffian systems of holonomic functions.

A Pfaffian system is the companion form d_i q = A_i q of a
finite-dimensional derivative space.  Systems come in two flavours:

* canonical systems carry a monomial ``basis`` starting with the
  identity operator, so q = [f, d^a1 f, ...] for a solution f;
* composite systems (direct sums / tensor products built by the closure
  operations) have ``basis = None`` until :func:`canonicalize` rebuilds
  a monomial basis via derived rows.
"""

from __future__ import annotations

import heapq

import mpmath

from .errors import (BasePointMismatch, BasisNotCanonical,
                     IntegrabilityViolation, RankDeficientExtract)
from .linalg import (RowSpace, denominator_lcm, iter_matrix, mat_diff,
                     mat_mul, mat_sub, mat_zero, vec_matvec)
from .ops import DiffOperator, GroebnerBasis, reduce, standard_monomials
from .orders import TermOrder, exp_add, grevlex, unit_exp
from .ring import Context, NumPoint, RationalFunction


class PfaffianSystem:
    def __init__(self, ctx: Context, A, basis=None, check: bool = True):
        self.ctx = ctx
        self.A = A
        self.basis = list(map(tuple, basis)) if basis is not None else None
        d = len(A[0])
        if len(A) != ctx.nz or any(len(M) != d or len(M[0]) != d for M in A):
            raise ValueError("need 2n square matrices of equal size")
        if self.basis is not None:
            if len(self.basis) != d or self.basis[0] != (0,) * ctx.nz:
                raise BasisNotCanonical("monomial basis must start with the identity")
        self.singular_locus = denominator_lcm(iter_matrix_all(A), ctx)
        if check and not self.check_integrability():
            raise IntegrabilityViolation("d_j A_i + A_i A_j != d_i A_j + A_j A_i")

    @property
    def dim(self) -> int:
        return len(self.A[0])

    @property
    def is_canonical(self) -> bool:
        return self.basis is not None

    def check_integrability(self) -> bool:
        for i in range(self.ctx.nz):
            for j in range(i + 1, self.ctx.nz):
                lhs = mat_sub(mat_diff(self.A[i], j), mat_diff(self.A[j], i))
                rhs = mat_sub(mat_mul(self.A[j], self.A[i]), mat_mul(self.A[i], self.A[j]))
                if any(not (a - b).is_zero for ra, rb in zip(lhs, rhs) for a, b in zip(ra, rb)):
                    return False
        return True

    def to_json(self) -> dict:
        return {
            "n": self.ctx.n,
            "params": list(self.ctx.params),
            "dim": self.dim,
            "basis": [list(b) for b in self.basis] if self.basis is not None else None,
            "A": [[[str(v) for v in row] for row in M] for M in self.A],
            "singular_locus": str(self.singular_locus),
        }

    @classmethod
    def from_json(cls, data: dict, ctx: Context | None = None) -> "PfaffianSystem":
        if ctx is None:
            ctx = Context(data["n"], tuple(data["params"]))
        A = [[[ctx.rational(v) for v in row] for row in M] for M in data["A"]]
        return cls(ctx, A, basis=data.get("basis"))


def iter_matrix_all(A):
    for M in A:
        for row in M:
            yield from row


def check_integrability(S: PfaffianSystem) -> bool:
    return S.check_integrability()


def pfaffian_from_gb(G: GroebnerBasis) -> PfaffianSystem:
    """Companion system on the standard-monomial basis of a GB."""
    ctx = G.ctx
    basis = standard_monomials(G)
    index = {b: j for j, b in enumerate(basis)}
    d = len(basis)
    A = []
    for i in range(ctx.nz):
        M = mat_zero(ctx, d, d)
        for k, alpha in enumerate(basis):
            target = exp_add(alpha, unit_exp(ctx.nz, i))
            rem = reduce(DiffOperator.monomial(ctx, target), G.elements, G.term_order)
            for beta, c in rem.terms.items():
                if beta not in index:
                    raise IntegrabilityViolation(
                        "normal form leaves the standard-monomial span")
                M[k][index[beta]] = c
        A.append(M)
    return PfaffianSystem(ctx, A, basis=basis)


class HolonomicFunction:
    """A Pfaffian system plus an extraction row and boundary data.

    The represented function is f(z) = extract(z) . q(z) where q solves
    the system with q(base_point) = qbar.
    """

    def __init__(self, system: PfaffianSystem, extract, base_point: NumPoint, qbar):
        self.system = system
        self.extract = list(extract)
        self.base_point = base_point
        self.qbar = [mpmath.mpf(v) if not isinstance(v, mpmath.mpf) else v for v in qbar]
        if len(self.extract) != system.dim or len(self.qbar) != system.dim:
            raise ValueError("extract/qbar length must equal the system dimension")

    @property
    def ctx(self) -> Context:
        return self.system.ctx

    def value_at_base(self):
        total = mpmath.mpf(0)
        for e, q in zip(self.extract, self.qbar):
            if not e.is_zero:
                total += mpmath.mpf(e.eval(self.base_point)) * q
        return total

    def _same_base(self, other: "HolonomicFunction"):
        if self.ctx is not other.ctx:
            raise BasePointMismatch("different variable contexts")
        if (tuple(map(mpmath.mpf, self.base_point.coords))
                != tuple(map(mpmath.mpf, other.base_point.coords))
                or self.base_point.params != other.base_point.params):
            raise BasePointMismatch("closure requires identical base points")


def closure_sum(F: HolonomicFunction, G: HolonomicFunction) -> HolonomicFunction:
    F._same_base(G)
    ctx = F.ctx
    dF, dG = F.system.dim, G.system.dim
    A = []
    for i in range(ctx.nz):
        M = mat_zero(ctx, dF + dG, dF + dG)
        for r in range(dF):
            for c in range(dF):
                M[r][c] = F.system.A[i][r][c]
        for r in range(dG):
            for c in range(dG):
                M[dF + r][dF + c] = G.system.A[i][r][c]
        A.append(M)
    system = PfaffianSystem(ctx, A, check=False)
    return HolonomicFunction(system, F.extract + G.extract, F.base_point,
                             F.qbar + G.qbar)


def closure_prod(F: HolonomicFunction, G: HolonomicFunction) -> HolonomicFunction:
    F._same_base(G)
    ctx = F.ctx
    dF, dG = F.system.dim, G.system.dim
    d = dF * dG

    def kron_pos(r, s):
        return r * dG + s

    A = []
    for i in range(ctx.nz):
        M = mat_zero(ctx, d, d)
        AF, AG = F.system.A[i], G.system.A[i]
        for r in range(dF):
            for s in range(dG):
                row = kron_pos(r, s)
                for c in range(dF):
                    if not AF[r][c].is_zero:
                        M[row][kron_pos(c, s)] = M[row][kron_pos(c, s)] + AF[r][c]
                for c in range(dG):
                    if not AG[s][c].is_zero:
                        M[row][kron_pos(r, c)] = M[row][kron_pos(r, c)] + AG[s][c]
        A.append(M)
    system = PfaffianSystem(ctx, A, check=False)
    extract = [F.extract[r] * G.extract[s] for r in range(dF) for s in range(dG)]
    qbar = [F.qbar[r] * G.qbar[s] for r in range(dF) for s in range(dG)]
    return HolonomicFunction(system, extract, F.base_point, qbar)


def closure_diff(F: HolonomicFunction, i: int) -> HolonomicFunction:
    row = [e.diff(i) for e in F.extract]
    row = [a + b for a, b in zip(row, vec_matvec(F.extract, F.system.A[i]))]
    return HolonomicFunction(F.system, row, F.base_point, F.qbar)


def scale(F: HolonomicFunction, c) -> HolonomicFunction:
    c = F.ctx.rational(c)
    return HolonomicFunction(F.system, [c * e for e in F.extract], F.base_point, F.qbar)


def constant(ctx: Context, value, base_point: NumPoint) -> HolonomicFunction:
    """The constant function as a 1-dimensional system."""
    A = [[[ctx.zero]] for _ in range(ctx.nz)]
    system = PfaffianSystem(ctx, A, basis=[(0,) * ctx.nz], check=False)
    return HolonomicFunction(system, [ctx.rational(1)], base_point, [mpmath.mpf(value)])


def canonicalize(F: HolonomicFunction, order: TermOrder | None = None):
    """Rebuild a monomial-basis system for the function F represents.

    Derived rows r_a (with r_a . q = d^a f) are generated breadth-first
    in the term order; a maximal independent subset becomes the new
    basis, and every rejected row contributes an annihilating operator.

    Returns (canonical HolonomicFunction, list of annihilating operators).
    """
    ctx = F.ctx
    if order is None:
        order = grevlex(ctx.nz)
    if all(e.is_zero for e in F.extract):
        raise RankDeficientExtract("extraction row is identically zero")
    width = F.system.dim
    space = RowSpace(ctx, width)
    zero_alpha = (0,) * ctx.nz
    kept: list[tuple] = []
    kept_rows: list[list[RationalFunction]] = []
    expressions: dict[tuple, list[RationalFunction]] = {}
    annihilators: list[DiffOperator] = []
    visited = set()
    counter = 0
    heap = [(order.key(zero_alpha), counter, zero_alpha, list(F.extract))]
    while heap:
        _, _, alpha, row = heapq.heappop(heap)
        if alpha in visited:
            continue
        visited.add(alpha)
        dep = space.add(row)
        if dep is None:
            kept.append(alpha)
            kept_rows.append(row)
            for i in range(ctx.nz):
                succ = exp_add(alpha, unit_exp(ctx.nz, i))
                if succ in visited:
                    continue
                srow = [v.diff(i) for v in row]
                srow = [a + b for a, b in zip(srow, vec_matvec(row, F.system.A[i]))]
                counter += 1
                heapq.heappush(heap, (order.key(succ), counter, succ, srow))
        else:
            expressions[alpha] = dep
            op = DiffOperator.monomial(ctx, alpha)
            for coef, beta in zip(dep, kept):
                if not coef.is_zero:
                    op = op - DiffOperator.monomial(ctx, beta, coef)
            annihilators.append(op)

    d_new = len(kept)
    index = {a: k for k, a in enumerate(kept)}
    A_new = []
    for i in range(ctx.nz):
        M = mat_zero(ctx, d_new, d_new)
        for k, alpha in enumerate(kept):
            succ = exp_add(alpha, unit_exp(ctx.nz, i))
            if succ in index:
                M[k][index[succ]] = ctx.one
            else:
                for coef, j in zip(expressions[succ], range(d_new)):
                    M[k][j] = coef
        A_new.append(M)
    system = PfaffianSystem(ctx, A_new, basis=kept)
    qbar = []
    for row in kept_rows:
        total = mpmath.mpf(0)
        for v, q in zip(row, F.qbar):
            if not v.is_zero:
                total += mpmath.mpf(v.eval(F.base_point)) * q
        qbar.append(total)
    extract = [ctx.one] + [ctx.zero] * (d_new - 1)
    return HolonomicFunction(system, extract, F.base_point, qbar), annihilators
