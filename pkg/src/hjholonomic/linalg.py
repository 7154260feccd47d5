"""Exact linear algebra over the rational-function field.

Vectors and matrices are plain lists of RationalFunction; sizes stay
small (at most a few dozen), so straightforward Gaussian elimination in
the fraction field is both exact and fast enough.
"""

from __future__ import annotations

from .ring import Context, Poly, RationalFunction


class RowSpace:
    """Incremental row space with expression of dependent rows.

    Rows fed to :meth:`add` are either adopted as new independent
    generators or expressed as an exact combination of the previously
    adopted ones.
    """

    def __init__(self, ctx: Context, width: int):
        self.ctx = ctx
        self.width = width
        self.kept: list[list[RationalFunction]] = []
        self._ech: list[tuple[int, list[RationalFunction]]] = []
        self._trans: list[list[RationalFunction]] = []

    def __len__(self):
        return len(self.kept)

    def _reduce(self, row):
        work = list(row)
        coeffs = [self.ctx.zero] * len(self.kept)
        for (piv, ech), trans in zip(self._ech, self._trans):
            f = work[piv]
            if f.is_zero:
                continue
            for i in range(self.width):
                if not ech[i].is_zero:
                    work[i] = work[i] - f * ech[i]
            for k in range(len(self.kept)):
                if not trans[k].is_zero:
                    coeffs[k] = coeffs[k] + f * trans[k]
        return coeffs, work

    def express(self, row):
        """Coefficients of row in the kept rows, or None if independent."""
        coeffs, work = self._reduce(row)
        if any(not v.is_zero for v in work):
            return None
        return coeffs

    def add(self, row):
        """Adopt row if independent (returns None), else return its
        expression in the previously adopted rows."""
        if len(row) != self.width:
            raise ValueError("row width mismatch")
        coeffs, work = self._reduce(row)
        piv = next((i for i, v in enumerate(work) if not v.is_zero), None)
        if piv is None:
            return coeffs
        pv = work[piv]
        ech = [v / pv for v in work]
        trans = [-c / pv for c in coeffs] + [self.ctx.one / pv]
        for t in self._trans:
            t.append(self.ctx.zero)
        self.kept.append(list(row))
        self._ech.append((piv, ech))
        self._trans.append(trans)
        return None


# -- dense matrix helpers ---------------------------------------------

def mat_zero(ctx: Context, rows: int, cols: int):
    return [[ctx.zero for _ in range(cols)] for _ in range(rows)]


def mat_mul(A, B):
    rows, inner, cols = len(A), len(B), len(B[0])
    ctx = A[0][0].ctx
    out = mat_zero(ctx, rows, cols)
    for i in range(rows):
        for k in range(inner):
            a = A[i][k]
            if a.is_zero:
                continue
            for j in range(cols):
                if not B[k][j].is_zero:
                    out[i][j] = out[i][j] + a * B[k][j]
    return out


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_transpose(A):
    return [list(col) for col in zip(*A)]


def mat_diff(A, i: int):
    return [[v.diff(i) for v in row] for row in A]


def mat_scale(A, c):
    return [[v * c for v in row] for row in A]


def mat_is_zero(A) -> bool:
    return all(v.is_zero for row in A for v in row)


def mat_eval(A, point, tol=1e-12):
    return [[v.eval(point, tol) for v in row] for row in A]


def vec_matvec(row, A):
    """Row vector times matrix."""
    return [sum((row[k] * A[k][j] for k in range(len(row))), row[0].ctx.zero)
            for j in range(len(A[0]))]


def denominator_lcm(values, ctx: Context) -> Poly:
    """LCM of denominators across an iterable of RationalFunctions."""
    acc = ctx.poly(1)
    for v in values:
        acc = acc.lcm(v.denom)
    return acc.monic()


def iter_matrix(A):
    for row in A:
        yield from row
