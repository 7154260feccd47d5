import mpmath
import numpy as np
import pytest

from hjholonomic import (Context, Evaluator, NumPoint, build_h, condition_set,
                         extract_symplectic, gamma_basis, parse, solve_qbars)

mpmath.mp.dps = 40

HAM_TEXT = "-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4"


class Pipeline:
    """Everything the degree-4 example produces, computed once."""

    def __init__(self, a, b):
        self.ctx = Context(2, ("a", "b"))
        self.ast = parse(HAM_TEXT, 2, ("a", "b"))
        xb = mpmath.pi / 6
        self.zbar = NumPoint(
            [xb, mpmath.mpf(1), b * xb ** 4, mpmath.mpf(2) / a],
            params={"a": mpmath.mpf(a), "b": mpmath.mpf(b)})
        self.h, self.annihilators = build_h(self.ast, self.ctx, self.zbar)
        self.S = self.h.system
        self.sym = extract_symplectic(self.S)
        self.cert = gamma_basis(self.S, self.sym, h=self.h)
        self.cond = condition_set(self.cert, self.sym, self.S, self.h, self.zbar)
        self.solution = solve_qbars(self.cond, 2, self.sym)
        self.qbar2 = self.solution.qbars[0]
        self.zb = np.array([float(c) for c in self.zbar.coords])

    def evaluators(self):
        return [Evaluator.from_holonomic(self.h),
                Evaluator(self.S, self.zbar, self.qbar2)]


@pytest.fixture(scope="session")
def pipe21():
    return Pipeline(2, 1)


@pytest.fixture(scope="session")
def pipe11():
    return Pipeline(1, 1)


@pytest.fixture(scope="session")
def ctx1():
    return Context(1)


@pytest.fixture(scope="session")
def ctx2():
    return Context(2, ("a", "b"))
