"""Numerical evaluation layer.

Pfaffian systems are exact objects; this module turns them into numbers:
it integrates dq = (sum_i dz_i A_i) q along piecewise-linear paths (the
holonomic gradient method), evaluates first integrals and their
gradients, simulates the Hamiltonian flow, and reconstructs the
generating function v on a solution branch by Newton continuation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy
from scipy.integrate import solve_ivp

from .errors import (JacobianSingular, NewtonDivergence, SingularPathCrossing,
                     StepLimitExceeded)
from .pfaffian import HolonomicFunction, PfaffianSystem
from .ring import NumPoint

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
SINGULAR_REL_TOL = 1e-8
SAMPLES_PER_SEGMENT = 64


@dataclass
class Path:
    """Piecewise-linear integration path with solver configuration."""
    waypoints: list
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    max_steps: int = 100_000
    samples_per_segment: int = SAMPLES_PER_SEGMENT

    def __post_init__(self):
        pts = [np.asarray([float(c) for c in w], dtype=float)
               if not isinstance(w, np.ndarray) else w.astype(float)
               for w in self.waypoints]
        self.points = pts
        if len(pts) < 2:
            raise ValueError("a path needs at least two waypoints")
        for a, b in zip(pts, pts[1:]):
            if np.allclose(a, b):
                raise ValueError("consecutive waypoints must be distinct")


def _coords(z) -> np.ndarray:
    if isinstance(z, NumPoint):
        return np.array([float(c) for c in z.coords])
    return np.asarray(z, dtype=float)


def _fold_params(poly, ctx, params: dict):
    """Polynomial terms with parameter symbols folded into the
    coefficients: list of (z-exponents, float coefficient)."""
    nz = ctx.nz
    out = []
    for exps, c in poly.p.terms():
        val = float(c)
        for name, e in zip(ctx.params, exps[nz:]):
            if e:
                val *= float(params[name]) ** e
        out.append((exps[:nz], val))
    return out


class CompiledSystem:
    """Fast float evaluation of a Pfaffian system at numeric points.

    Parameters are fixed at compile time; the A matrices become plain
    numpy callables of the 2n coordinates.
    """

    def __init__(self, S: PfaffianSystem, params: dict | None = None):
        self.system = S
        ctx = S.ctx
        self.ctx = ctx
        self.dim = S.dim
        params = dict(params or {})
        missing = [p for p in ctx.params if p not in params]
        if missing:
            raise ValueError("missing numeric values for parameters %s" % missing)
        self.params = params
        zsyms = ctx.symbols[:ctx.nz]
        psubs = {ctx.symbols[ctx.nz + k]: sympy.Float(float(params[name]), 17)
                 for k, name in enumerate(ctx.params)}
        self._A = []
        for i in range(ctx.nz):
            M = sympy.Matrix([[v.as_expr().subs(psubs) for v in row]
                              for row in S.A[i]])
            self._A.append(sympy.lambdify(zsyms, M, "numpy"))
        self._den_terms = _fold_params(S.singular_locus, ctx, params)

    def A_at(self, i: int, z: np.ndarray) -> np.ndarray:
        return np.asarray(self._A[i](*z), dtype=float)

    def Bx_Bp(self, z: np.ndarray):
        n = self.ctx.n
        Bx = np.array([self.A_at(i, z)[0] for i in range(n)])
        Bp = np.array([self.A_at(n + i, z)[0] for i in range(n)])
        return Bx, Bp

    def denominator_margin(self, z: np.ndarray) -> float:
        """|D(z)| relative to the size of D's terms at z (scale-free)."""
        val = 0.0
        scale = 0.0
        az = np.abs(z)
        for exps, c in self._den_terms:
            mono = 1.0
            for zi, e in zip(z, exps):
                if e:
                    mono *= zi ** e
            val += c * mono
            amono = 1.0
            for zi, e in zip(az, exps):
                if e:
                    amono *= zi ** e
            scale += abs(c) * amono
        return abs(val) / max(1.0, scale)

    def check_regular(self, z: np.ndarray, tol: float = SINGULAR_REL_TOL):
        if self.denominator_margin(z) < tol:
            raise SingularPathCrossing(
                "singular locus within %.1e at z = %s" % (tol, list(z)))


def hgm_integrate(S: PfaffianSystem, zbar, qbar, path: Path,
                  params: dict | None = None) -> np.ndarray:
    """Transport q from the base point to the end of the path."""
    start = _coords(zbar)
    if params is None and isinstance(zbar, NumPoint):
        params = zbar.params
    cs = CompiledSystem(S, params) if not isinstance(S, CompiledSystem) else S
    if not np.allclose(start, path.points[0], rtol=0, atol=1e-12):
        raise ValueError("path must start at the base point")
    q = np.array([float(v) for v in qbar])
    for z0, z1 in zip(path.points, path.points[1:]):
        q = _integrate_segment(cs, z0, z1, q, path)
    return q


def _integrate_segment(cs: CompiledSystem, z0, z1, q, path: Path) -> np.ndarray:
    delta = z1 - z0
    for t in np.linspace(0.0, 1.0, path.samples_per_segment):
        cs.check_regular(z0 + t * delta)

    def rhs(t, y):
        z = z0 + t * delta
        M = sum(delta[i] * cs.A_at(i, z) for i in range(cs.ctx.nz))
        return M @ y

    sol = solve_ivp(rhs, (0.0, 1.0), q, method="RK45",
                    rtol=path.rtol, atol=path.atol, max_step=1.0)
    if not sol.success:
        raise StepLimitExceeded("segment integration failed: %s" % sol.message)
    if sol.t.size > path.max_steps:
        raise StepLimitExceeded("step budget %d exceeded" % path.max_steps)
    return sol.y[:, -1]


def eval_gradients(S, sym, q_at, z):
    """(grad_x f, grad_p f) = (B_x(z) q, B_p(z) q)."""
    zp = z if isinstance(z, NumPoint) else NumPoint(z)
    gx = np.array([sum(float(v.eval(zp)) * float(qi)
                       for v, qi in zip(row, q_at) if not v.is_zero)
                   for row in sym.B_x])
    gp = np.array([sum(float(v.eval(zp)) * float(qi)
                       for v, qi in zip(row, q_at) if not v.is_zero)
                   for row in sym.B_p])
    return gx, gp


def poisson_numeric(grads1, grads2) -> float:
    """(grad_p f)^T grad_x g - (grad_x f)^T grad_p g."""
    gx1, gp1 = grads1
    gx2, gp2 = grads2
    return float(gp1 @ gx2 - gx1 @ gp2)


class Evaluator:
    """Numeric evaluator of one canonical holonomic function.

    Values away from the base point come from path integration; results
    are cached per target so Newton loops and flow verification do not
    repeat work.
    """

    def __init__(self, S: PfaffianSystem, base: NumPoint, qbar,
                 params: dict | None = None,
                 rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL):
        if not S.is_canonical:
            raise ValueError("evaluator needs a canonical system")
        self.cs = CompiledSystem(S, params if params is not None else base.params)
        self.base = _coords(base)
        self.q0 = np.array([float(v) for v in qbar])
        self.rtol = rtol
        self.atol = atol
        self._cache: dict = {}

    @classmethod
    def from_holonomic(cls, h: HolonomicFunction, **kw) -> "Evaluator":
        return cls(h.system, h.base_point, h.qbar, **kw)

    @property
    def n(self) -> int:
        return self.cs.ctx.n

    def q_at(self, z, via=None) -> np.ndarray:
        z = _coords(z)
        key = tuple(np.round(z, 14))
        if key in self._cache:
            return self._cache[key]
        if np.allclose(z, self.base, rtol=0, atol=1e-14):
            q = self.q0.copy()
        else:
            waypoints = [self.base] + list(via or []) + [z]
            path = Path(waypoints, rtol=self.rtol, atol=self.atol)
            q = hgm_integrate(self.cs, self.base, self.q0, path)
        self._cache[key] = q
        return q

    def value(self, z, via=None) -> float:
        return float(self.q_at(z, via)[0])

    def gradients(self, z, via=None):
        z = _coords(z)
        q = self.q_at(z, via)
        Bx, Bp = self.cs.Bx_Bp(z)
        return Bx @ q, Bp @ q


@dataclass
class FlowResult:
    times: np.ndarray
    states: np.ndarray       # shape (len(times), 2n)
    integrals: np.ndarray    # shape (len(times), k): recorded f values
    residuals: np.ndarray    # h along the trajectory (first record)

    def drift(self, k: int = None) -> float:
        vals = self.integrals if k is None else self.integrals[:, [k]]
        return float(np.max(np.abs(vals - vals[0])))


def hamiltonian_flow(S: PfaffianSystem, z0, q0s, T: float,
                     params: dict | None = None,
                     rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                     samples: int = 257) -> FlowResult:
    """Integrate dx = grad_p h, dp = -grad_x h from z0 for time T.

    q0s are boundary vectors at z0; the first must belong to h and
    drives the flow.  All are transported jointly, so the recorded first
    components are the f values along the trajectory with no extra path
    integrations.
    """
    cs = CompiledSystem(S, params if params is not None else
                        (z0.params if isinstance(z0, NumPoint) else None))
    nz, d, n = cs.ctx.nz, cs.dim, cs.ctx.n
    z0 = _coords(z0)
    k = len(q0s)
    y0 = np.concatenate([z0] + [np.array([float(v) for v in q]) for q in q0s])

    def rhs(t, y):
        z = y[:nz]
        cs.check_regular(z)
        A = [cs.A_at(i, z) for i in range(nz)]
        qh = y[nz:nz + d]
        gx = np.array([A[i][0] @ qh for i in range(n)])
        gp = np.array([A[n + i][0] @ qh for i in range(n)])
        zdot = np.concatenate([gp, -gx])
        M = sum(zdot[i] * A[i] for i in range(nz))
        out = [zdot]
        for j in range(k):
            out.append(M @ y[nz + j * d: nz + (j + 1) * d])
        return np.concatenate(out)

    t_eval = np.linspace(0.0, T, samples)
    sol = solve_ivp(rhs, (0.0, T), y0, method="RK45",
                    rtol=rtol, atol=atol, t_eval=t_eval)
    if not sol.success:
        raise StepLimitExceeded("flow integration failed: %s" % sol.message)
    states = sol.y[:nz].T
    integrals = np.array([sol.y[nz + j * d] for j in range(k)]).T
    return FlowResult(sol.t, states, integrals, integrals[:, 0])


def reconstruct_v(evaluators, x_path, p0, newton_tol: float = 1e-12,
                  max_iter: int = 25):
    """Continue the momentum branch p(x) along an x-path and accumulate
    the generating function v.

    evaluators are the n first-integral evaluators (the Hamiltonian
    first); p solves f(x, p) = 0 by Newton steps with the grad_p rows as
    Jacobian.  v is the trapezoidal line integral of p^T dx with
    v(x_0) = 0.  Returns (p samples, v values, residuals |f_1|).
    """
    n = evaluators[0].n
    if len(evaluators) != n:
        raise ValueError("need one evaluator per degree of freedom")
    xs = [np.asarray(x, dtype=float) for x in x_path]
    p = np.asarray(p0, dtype=float).copy()
    ps, vs, residuals = [], [], []
    v = 0.0
    for idx, x in enumerate(xs):
        p = _newton_momentum(evaluators, x, p, newton_tol, max_iter)
        if idx > 0:
            dx = xs[idx] - xs[idx - 1]
            v += 0.5 * float((ps[-1] + p) @ dx)
        z = np.concatenate([x, p])
        residuals.append(abs(evaluators[0].value(z)))
        ps.append(p.copy())
        vs.append(v)
    return np.array(ps), np.array(vs), np.array(residuals)


def _newton_momentum(evaluators, x, p_start, tol, max_iter):
    p = p_start.copy()
    n = len(evaluators)
    for _ in range(max_iter):
        z = np.concatenate([x, p])
        f = np.empty(n)
        J = np.empty((n, n))
        for k, ev in enumerate(evaluators):
            q = ev.q_at(z)
            f[k] = q[0]
            _, gp = ev.gradients(z)
            J[k] = gp
        if np.max(np.abs(f)) < tol * max(1.0, np.max(np.abs(p))):
            return p
        try:
            cond = np.linalg.cond(J)
        except np.linalg.LinAlgError:
            cond = np.inf
        if not np.isfinite(cond) or cond > 1e12:
            raise JacobianSingular("momentum Jacobian is singular at x = %s" % list(x))
        p = p - np.linalg.solve(J, f)
    raise NewtonDivergence("no convergence in %d iterations at x = %s"
                           % (max_iter, list(x)))
