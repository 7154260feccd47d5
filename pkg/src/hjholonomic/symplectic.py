"""Reduction of the first-integral conditions to finite algebraic form.

From a canonical Pfaffian system for the Hamiltonian this module
extracts the gradient rows B_x, B_p and the skew form Omega, iterates
the maps D_i W = A_i^T W + W A_i + d_i W, derives the finite index set
Gamma whose evaluated bilinear conditions are equivalent to the full
infinite family, and solves the resulting conditions for admissible
boundary vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (BasisNotCanonical, IntegrabilityViolation, NoSolution,
                     NotZeroDimensional, ResourceLimit, SingularBasePoint)
from .linalg import (RowSpace, denominator_lcm, iter_matrix, mat_add,
                     mat_diff, mat_eval, mat_mul, mat_sub, mat_transpose)
from .ops import DiffOperator, OperatorIdeal, buchberger, standard_monomials
from .orders import TermOrder, exp_add, grevlex, unit_exp
from .pfaffian import HolonomicFunction, PfaffianSystem
from .ring import NumPoint, Poly


@dataclass
class SymplecticData:
    B_x: list
    B_p: list
    Omega: list


def extract_symplectic(S: PfaffianSystem) -> SymplecticData:
    """First rows of the A matrices and the skew form they induce."""
    if not S.is_canonical:
        raise BasisNotCanonical("need a monomial basis starting with 1")
    n = S.ctx.n
    B_x = [list(S.A[i][0]) for i in range(n)]
    B_p = [list(S.A[n + i][0]) for i in range(n)]
    Omega = mat_sub(mat_mul(mat_transpose(B_p), B_x),
                    mat_mul(mat_transpose(B_x), B_p))
    for r in range(len(Omega)):
        for c in range(len(Omega)):
            if not (Omega[r][c] + Omega[c][r]).is_zero:
                raise IntegrabilityViolation("Omega is not skew-symmetric")
    return SymplecticData(B_x, B_p, Omega)


def apply_D(i: int, W, S: PfaffianSystem):
    """The map W -> A_i^T W + W A_i + d_i W on skew matrices."""
    Ai = S.A[i]
    return mat_add(mat_add(mat_mul(mat_transpose(Ai), W), mat_mul(W, Ai)),
                   mat_diff(W, i))


def _skew_vector(W):
    d = len(W)
    return [W[r][c] for r in range(d) for c in range(r + 1, d)]


@dataclass
class GammaCertificate:
    gamma: list            # multi-indices, gamma[0] == 0
    DOmega: list           # matching skew matrices of rational functions
    T: list                # 2n coefficient matrices for the spanning set
    E: Poly                # LCM of the denominators in T
    relations: list        # annihilating operators of all Poisson brackets
    spanning: list = None  # R(z)-basis indices of the full D^a Omega span

    def __post_init__(self):
        if self.spanning is None:
            self.spanning = list(self.gamma)

    @property
    def t(self) -> int:
        return len(self.gamma)


def default_gamma_order(nz: int) -> TermOrder:
    """Graded order whose tie break prefers small x-indices.

    Precedence runs p_n > ... > p_1 > x_n > ... > x_1, so in ascending
    enumeration the first-order indices appear as x_1, x_2, ..., p_n and
    Groebner leading terms prefer the late variables.
    """
    return TermOrder("grlex", tuple(reversed(range(nz))))


def gamma_basis(S: PfaffianSystem, sym: SymplecticData,
                h: HolonomicFunction | None = None,
                order: TermOrder | None = None, level_cap: int = 6,
                gb_max_pairs: int = 20000, gb_max_degree: int = 40,
                rank_tol: float = 1e-9) -> GammaCertificate:
    """Derive the finite index set Gamma and its certificate.

    Level by level, all matrices D^a Omega with |a| <= L are generated;
    their linear relations give operators annihilating every Poisson
    bracket of solutions.  Once those operators span a zero-dimensional
    ideal, its standard monomials nominate the candidate basis, which is
    thinned greedily to a maximal independent subset -- the spanning set
    whose T system certifies the finite reduction.

    When the Hamiltonian's boundary data is supplied via ``h``, the
    condition rows qbar1^T (D^a Omega)(zbar) are additionally thinned to
    a numerically independent subset: a first integral paired with h
    only ever meets the conditions through these rows, so rows that are
    linear combinations of earlier ones at the base point contribute no
    new equation.  Gamma is that smaller set; ``spanning`` retains the
    full R(z)-basis.
    """
    ctx = S.ctx
    nz = ctx.nz
    if order is None:
        order = default_gamma_order(nz)
    d = S.dim
    width = d * (d - 1) // 2
    zero = (0,) * nz

    mats = {zero: sym.Omega}

    def mat_for(alpha):
        if alpha not in mats:
            i = next(j for j in range(nz) if alpha[j] > 0)
            parent = list(alpha)
            parent[i] -= 1
            mats[alpha] = apply_D(i, mat_for(tuple(parent)), S)
        return mats[alpha]

    if width == 0 or all(v.is_zero for v in iter_matrix(sym.Omega)):
        T = [[[ctx.zero]] for _ in range(nz)]
        return GammaCertificate([zero], [sym.Omega], T, ctx.poly(1), [], [zero])

    space = RowSpace(ctx, width)
    kept_alphas: list[tuple] = []
    relations: list[DiffOperator] = []
    gb = None
    level_alphas = [zero]
    for level in range(level_cap + 1):
        if level > 0:
            prev = level_alphas
            seen = set()
            nxt = []
            for alpha in prev:
                for i in range(nz):
                    succ = exp_add(alpha, unit_exp(nz, i))
                    if succ not in seen:
                        seen.add(succ)
                        nxt.append(succ)
            level_alphas = order.sorted(nxt)
        for alpha in order.sorted(level_alphas):
            dep = space.add(_skew_vector(mat_for(alpha)))
            if dep is None:
                kept_alphas.append(alpha)
            else:
                op = DiffOperator.monomial(ctx, alpha)
                for coef, beta in zip(dep, kept_alphas):
                    if not coef.is_zero:
                        op = op - DiffOperator.monomial(ctx, beta, coef)
                relations.append(op)
        if not relations:
            continue
        try:
            gb = buchberger(OperatorIdeal(relations, order),
                            max_pairs=gb_max_pairs, max_degree=gb_max_degree)
            betas = standard_monomials(gb)
        except NotZeroDimensional:
            gb = None
            continue
        cert = _finish_gamma(ctx, S, sym, order, betas, mat_for, relations,
                             h, rank_tol)
        if cert is not None:
            return cert
        gb = None
    raise ResourceLimit("level budget %d exceeded while deriving Gamma" % level_cap)


def _finish_gamma(ctx, S, sym, order, betas, mat_for, relations, h, rank_tol):
    width = S.dim * (S.dim - 1) // 2
    # greedy maximal independent subset, smallest indices first
    spanning = []
    picked = RowSpace(ctx, width)
    for beta in order.sorted(betas):
        if picked.add(_skew_vector(mat_for(beta))) is None:
            spanning.append(beta)
    if not spanning or spanning[0] != (0,) * ctx.nz:
        return None
    t = len(spanning)
    T = [[[ctx.zero] * t for _ in range(t)] for _ in range(ctx.nz)]
    for k, gk in enumerate(spanning):
        for i in range(ctx.nz):
            target = apply_D(i, mat_for(gk), S)
            coeffs = picked.express(_skew_vector(target))
            if coeffs is None:
                return None  # span not closed yet; caller raises the level
            for l in range(t):
                T[i][k][l] = coeffs[l]
    # integrability of the bracket system, exact
    for i in range(ctx.nz):
        for j in range(i + 1, ctx.nz):
            lhs = mat_sub(mat_diff(T[i], j), mat_diff(T[j], i))
            rhs = mat_sub(mat_mul(T[j], T[i]), mat_mul(T[i], T[j]))
            for ra, rb in zip(lhs, rhs):
                for a, b in zip(ra, rb):
                    if not (a - b).is_zero:
                        raise IntegrabilityViolation(
                            "bracket coefficient matrices fail integrability")
    E = denominator_lcm((v for M in T for row in M for v in row), ctx)
    gamma = list(spanning)
    if h is not None:
        gamma = _trim_conditions(spanning, mat_for, h, rank_tol)
    DOmega = [mat_for(g) for g in gamma]
    return GammaCertificate(gamma, DOmega, T, E, list(relations), list(spanning))


def _trim_conditions(spanning, mat_for, h: HolonomicFunction, rank_tol: float):
    """Drop condition rows qbar1^T (D^a Omega)(zbar) that are linear
    combinations of earlier ones; they impose no further equation on the
    companion boundary vectors."""
    qbar1 = np.array([float(v) for v in h.qbar])
    kept, rows, rank = [], [], 0
    for g in spanning:
        W = mat_for(g)
        num = np.array([[float(v.eval(h.base_point)) for v in row] for row in W])
        cand = rows + [qbar1 @ num]
        M = np.array(cand)
        scale = max(1.0, np.max(np.abs(M)))
        new_rank = np.linalg.matrix_rank(M, tol=rank_tol * scale)
        if not kept or new_rank > rank:  # gamma always starts with the zero index
            kept.append(g)
            rows, rank = cand, new_rank
    return kept


# -- numeric condition set and solver ---------------------------------

@dataclass
class ConditionSet:
    zbar: NumPoint
    M: list          # numpy skew matrices (D^gamma Omega)(zbar)
    qbar1: np.ndarray


def poly_nonzero_at(P: Poly, point: NumPoint, tol: float) -> bool:
    from .ring import _eval_poly_abs, _eval_poly_num
    subs = point.substitutions(P.ctx)
    val = float(_eval_poly_num(P.p, subs))
    scale = _eval_poly_abs(P.p, subs)
    return abs(val) > tol * max(1.0, scale)


def condition_set(cert: GammaCertificate, sym: SymplecticData, S: PfaffianSystem,
                  h: HolonomicFunction, zbar: NumPoint,
                  tol: float = 1e-10) -> ConditionSet:
    if h.system is not S:
        raise ValueError("h must live on the given Pfaffian system")
    if not poly_nonzero_at(S.singular_locus, zbar, tol):
        raise SingularBasePoint("base point on the Pfaffian singular locus")
    if not poly_nonzero_at(cert.E, zbar, tol):
        raise SingularBasePoint("base point on the zero set of the bracket denominators")
    M = []
    for W in cert.DOmega:
        num = np.array([[float(v.eval(zbar)) for v in row] for row in W])
        skew_defect = np.max(np.abs(num + num.T)) if num.size else 0.0
        if skew_defect > 1e-12 * max(1.0, np.max(np.abs(num))):
            raise IntegrabilityViolation("evaluated D^gamma Omega is not skew")
        M.append(num)
    qbar1 = np.array([float(v) for v in h.qbar])
    return ConditionSet(zbar, M, qbar1)


def check_projectivity(Bp_at: np.ndarray, qbars: np.ndarray,
                       tol: float = 1e-9):
    """(flag, raw determinant) of det(B_p(zbar) [q_1 ... q_n])."""
    prod = Bp_at @ qbars
    det_raw = float(np.linalg.det(prod))
    norms = np.linalg.norm(qbars, axis=0)
    if np.any(norms == 0):
        return False, det_raw
    det_norm = float(np.linalg.det(Bp_at @ (qbars / norms)))
    return abs(det_norm) > tol, det_raw


@dataclass
class SolveResult:
    basis: list          # nullspace basis vectors (numpy, length d)
    admissible: list     # flag per basis vector (projectivity with qbar1)
    dets: list           # raw determinant per basis vector
    qbars: list          # chosen admissible tuple (q_2 .. q_n)


def _nullspace(rows: list) -> list:
    """Deterministic nullspace basis via row-reduced echelon form."""
    M = np.array(rows, dtype=float)
    m, d = M.shape
    scale = np.max(np.abs(M))
    tol = 1e-11 * max(1.0, scale)
    pivots = []
    r = 0
    for c in range(d):
        if r >= m:
            break
        k = r + np.argmax(np.abs(M[r:, c]))
        if abs(M[k, c]) <= tol:
            continue
        M[[r, k]] = M[[k, r]]
        M[r] = M[r] / M[r, c]
        for j in range(m):
            if j != r and abs(M[j, c]) > 0:
                M[j] = M[j] - M[j, c] * M[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(d) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(d)
        v[f] = 1.0
        for i, c in enumerate(pivots):
            v[c] = -M[i, f]
        basis.append(v)
    return basis


def _nice_vector(v: np.ndarray) -> np.ndarray:
    """Integer-scale a nullspace vector when it is (near-)rational."""
    v = v / np.linalg.norm(v)
    pivot = v[np.argmax(np.abs(v))]
    w = v / pivot
    fracs = [Fraction(float(c)).limit_denominator(1000) for c in w]
    approx = np.array([float(f) for f in fracs])
    if np.max(np.abs(approx - w)) < 1e-9:
        den = 1
        for f in fracs:
            den = den * f.denominator // _gcd(den, f.denominator)
        ints = np.array([float(f * den) for f in fracs])
        g = 0
        for c in ints:
            g = _gcd(g, int(round(abs(c))))
        if g > 1:
            ints = ints / g
        first = next(c for c in ints if c != 0)
        if first < 0:
            ints = -ints
        return ints + 0.0  # no negative zeros
    return v


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a if a else 1


def solve_qbars(cond: ConditionSet, n: int, sym: SymplecticData | None = None,
                det_tol: float = 1e-9) -> SolveResult:
    """Boundary vectors satisfying the evaluated bilinear conditions.

    n = 1 needs no companions; n = 2 is a plain linear nullspace; for
    n > 2 each additional vector is solved greedily against all earlier
    ones, which can fail even when other orderings would succeed.
    """
    if n < 1:
        raise ValueError("n >= 1")
    if n == 1:
        return SolveResult([], [], [], [])
    Bp_at = _numeric_Bp(sym, cond.zbar) if sym is not None else None

    def nullspace_against(vectors):
        rows = [v @ M for v in vectors for M in cond.M]
        return _nullspace(rows)

    ns = nullspace_against([cond.qbar1])
    if not ns:
        raise NoSolution("the bilinear conditions force q = 0")
    basis = [_nice_vector(v) for v in ns]
    admissible, dets = [], []
    for v in basis:
        if Bp_at is not None:
            ok, det = check_projectivity(Bp_at, np.column_stack([cond.qbar1, v]), det_tol)
        else:
            ok, det = False, 0.0
        admissible.append(ok)
        dets.append(det)
    if n == 2:
        if Bp_at is not None and not any(admissible):
            raise NoSolution("no nullspace direction satisfies projectivity")
        chosen = [basis[admissible.index(True)]] if any(admissible) else []
        return SolveResult(basis, admissible, dets, chosen)
    # n > 2: sequential greedy completion
    chosen = []
    for k in range(2, n + 1):
        ns = nullspace_against([cond.qbar1] + chosen)
        if not ns:
            raise NoSolution("conditions for q_%d have no nonzero solution" % k)
        picked = None
        for w in ns:
            cand = _nice_vector(w)
            cols = np.column_stack([cond.qbar1] + chosen + [cand])
            if Bp_at is None or np.linalg.matrix_rank(Bp_at @ cols) == k:
                picked = cand
                break
        if picked is None:
            raise NoSolution("greedy completion failed at q_%d" % k)
        chosen.append(picked)
    if Bp_at is not None:
        ok, det = check_projectivity(Bp_at, np.column_stack([cond.qbar1] + chosen), det_tol)
        if not ok:
            raise NoSolution("projectivity determinant vanished for the greedy tuple")
    return SolveResult(basis, admissible, dets, chosen)


def _numeric_Bp(sym: SymplecticData, zbar: NumPoint) -> np.ndarray:
    return np.array([[float(v.eval(zbar)) for v in row] for row in sym.B_p])
