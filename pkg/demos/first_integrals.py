"""Walkthrough: from a Hamiltonian to verified first integrals.

Runs the full pipeline on a degree-4 Hamiltonian with a sin atom and
two parameters, printing each intermediate object along the way.

    python demos/first_integrals.py
"""

import mpmath
import numpy as np

from hjholonomic import (Context, Evaluator, NumPoint, build_h,
                         condition_set, extract_symplectic, gamma_basis,
                         parse, poisson_numeric, solve_qbars)

TEXT = "-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4"


def main():
    ctx = Context(2, ("a", "b"))
    ast = parse(TEXT, 2, ("a", "b"))
    zbar = NumPoint([mpmath.pi / 6, 1, (mpmath.pi / 6) ** 4, 2],
                    params={"a": mpmath.mpf(1), "b": mpmath.mpf(1)})
    print("Hamiltonian:", TEXT)
    print("base point: ", [mpmath.nstr(c, 8) for c in zbar.coords])

    h, annihilators = build_h(ast, ctx, zbar)
    S = h.system
    print("\ncompanion system: dimension %d, basis %s" % (S.dim, S.basis))
    print("singular locus:  ", S.singular_locus)
    print("annihilators found while canonicalizing: %d" % len(annihilators))
    for op in annihilators[:3]:
        print("   ", op.to_text())

    sym = extract_symplectic(S)
    cert = gamma_basis(S, sym, h=h)
    print("\nfinite condition set: t = %d, Gamma = %s" % (cert.t, cert.gamma))
    print("spanning set of derived skew forms:", cert.spanning)

    cond = condition_set(cert, sym, S, h, zbar)
    sol = solve_qbars(cond, 2, sym)
    print("\ncompanion boundary vector:", sol.qbars[0])
    print("projectivity determinants per nullspace direction:",
          ["%.6g" % d for d in sol.dets])

    # numeric sanity: the Poisson bracket vanishes away from the base point
    ev_h = Evaluator.from_holonomic(h)
    ev_f = Evaluator(S, zbar, sol.qbars[0])
    z = np.array([float(c) for c in zbar.coords]) + [0.05, -0.08, 0.01, 0.12]
    bracket = poisson_numeric(ev_h.gradients(z), ev_f.gradients(z))
    print("\nat a nearby point:")
    print("  f value    = %.12g" % ev_f.value(z))
    print("  {h, f}     = %.3e" % bracket)


if __name__ == "__main__":
    main()
