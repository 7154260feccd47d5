"""Walkthrough: reconstructing the generating function v(x).

With the Hamiltonian and one independent first integral in hand, the
level set {h = 0, f = 0} is (locally) a graph p = p(x). Newton
continuation follows that branch along an x-path and accumulates
v(x) = integral of p . dx, whose gradient is the momentum field.

    python demos/generating_function.py
"""

import mpmath
import numpy as np

from hjholonomic import (Context, Evaluator, NumPoint, build_h,
                         condition_set, extract_symplectic, gamma_basis,
                         hamiltonian_flow, parse, reconstruct_v, solve_qbars)


def main():
    ctx = Context(2, ("a", "b"))
    ast = parse("-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4", 2, ("a", "b"))
    zbar = NumPoint([mpmath.pi / 6, 1, (mpmath.pi / 6) ** 4, 2],
                    params={"a": mpmath.mpf(1), "b": mpmath.mpf(1)})
    h, _ = build_h(ast, ctx, zbar)
    sym = extract_symplectic(h.system)
    cert = gamma_basis(h.system, sym, h=h)
    cond = condition_set(cert, sym, h.system, h, zbar)
    sol = solve_qbars(cond, 2, sym)

    ev_h = Evaluator.from_holonomic(h)
    ev_f = Evaluator(h.system, zbar, sol.qbars[0])

    zb = np.array([float(c) for c in zbar.coords])
    xs = [zb[:2] + 0.01 * k * np.array([1.0, -0.5]) for k in range(15)]
    ps, vs, residuals = reconstruct_v([ev_h, ev_f], xs, zb[2:])

    print("x1        x2        p1          p2          v           |h|")
    for x, p, v, r in zip(xs, ps, vs, residuals):
        print("%.6f  %.6f  %.8f  %.8f  %+.6e  %.1e"
              % (x[0], x[1], p[0], p[1], v, r))

    # the same branch is invariant under the Hamiltonian flow
    flow = hamiltonian_flow(h.system, zbar, [h.qbar, sol.qbars[0]], 0.3)
    print("\nflow for T = 0.3 from the base point:")
    print("  h drift =", "%.2e" % flow.drift(0))
    print("  f drift =", "%.2e" % flow.drift(1))


if __name__ == "__main__":
    main()
