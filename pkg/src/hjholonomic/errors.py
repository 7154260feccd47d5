"""Exception hierarchy shared by all layers of the package."""


class HJHolonomicError(Exception):
    """Base class for all package errors."""


class ZeroDenominator(HJHolonomicError):
    pass


class SingularPoint(HJHolonomicError):
    """Evaluation attempted where a denominator (numerically) vanishes."""


class NotZeroDimensional(HJHolonomicError):
    """The operator ideal has an infinite-dimensional quotient.

    ``missing`` lists the derivation indices with no pure-power leading
    monomial in the Groebner basis.
    """

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__(
            "no pure power of the derivation(s) %s occurs as a leading monomial"
            % (self.missing,)
        )


class ResourceLimit(HJHolonomicError):
    """A configured degree / queue / level budget was exceeded."""


class IntegrabilityViolation(HJHolonomicError):
    """The mixed-partials compatibility check of a Pfaffian system failed."""


class BasePointMismatch(HJHolonomicError):
    pass


class RankDeficientExtract(HJHolonomicError):
    pass


class BasisNotCanonical(HJHolonomicError):
    """The Pfaffian basis does not start with the identity operator."""


class SingularBasePoint(HJHolonomicError):
    """Chosen base point lies on (or too close to) the singular locus."""


class NoSolution(HJHolonomicError):
    """The bilinear condition system admits no admissible boundary vector."""


class SingularPathCrossing(HJHolonomicError):
    """An integration path passes too close to the singular locus."""


class StepLimitExceeded(HJHolonomicError):
    pass


class JacobianSingular(HJHolonomicError):
    pass


class NewtonDivergence(HJHolonomicError):
    pass


class HamSyntaxError(HJHolonomicError):
    """Parse failure, annotated with the 0-based position in the input."""

    def __init__(self, message, pos):
        self.pos = pos
        super().__init__("%s (at position %d)" % (message, pos))


class UnsupportedAtom(HJHolonomicError):
    """Expression falls outside the supported atom family."""
