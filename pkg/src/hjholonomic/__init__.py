"""Symbolic-numeric solver for Hamilton-Jacobi equations whose
Hamiltonian is holonomic: companion (Pfaffian) systems from annihilating
operator ideals, finite bilinear condition sets for first integrals, and
numeric evaluation by integrating the Pfaffian equations along paths."""

from .errors import (BasePointMismatch, BasisNotCanonical, HamSyntaxError,
                     HJHolonomicError, IntegrabilityViolation,
                     JacobianSingular, NewtonDivergence, NoSolution,
                     NotZeroDimensional, RankDeficientExtract, ResourceLimit,
                     SingularBasePoint, SingularPathCrossing, SingularPoint,
                     StepLimitExceeded, UnsupportedAtom, ZeroDenominator)
from .numeric import (CompiledSystem, Evaluator, FlowResult, Path,
                      eval_gradients, hamiltonian_flow, hgm_integrate,
                      poisson_numeric, reconstruct_v)
from .ops import (DiffOperator, GroebnerBasis, OperatorIdeal, buchberger,
                  ideal_membership, reduce, standard_monomials)
from .orders import TermOrder, grevlex, grlex
from .parser import (HamiltonianAST, build_h, oracle_diff, parse, pretty)
from .pfaffian import (HolonomicFunction, PfaffianSystem, canonicalize,
                       closure_diff, closure_prod, closure_sum,
                       pfaffian_from_gb)
from .ring import Context, NumPoint, Poly, RationalFunction
from .symplectic import (ConditionSet, GammaCertificate, SolveResult,
                         SymplecticData, apply_D, check_projectivity,
                         condition_set, extract_symplectic, gamma_basis,
                         solve_qbars)

__version__ = "0.1.0"
