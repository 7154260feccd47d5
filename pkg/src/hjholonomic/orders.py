"""Monomial orders on derivation exponent multi-indices.

An order is represented by a sortable key on exponent tuples; all orders
here are graded, so they are well-founded and multiplicative.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TermOrder:
    """Graded order with a configurable variable precedence.

    ``precedence`` lists variable positions from most to least significant.
    ``kind`` is "grlex" (lexicographic tie break) or "grevlex" (reverse
    lexicographic tie break).
    """

    kind: str
    precedence: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("grlex", "grevlex"):
            raise ValueError("unknown order kind %r" % self.kind)
        if sorted(self.precedence) != list(range(len(self.precedence))):
            raise ValueError("precedence must be a permutation of variable positions")

    @property
    def nvars(self) -> int:
        return len(self.precedence)

    def key(self, alpha: tuple[int, ...]):
        """Sortable key: bigger key = bigger monomial."""
        perm = tuple(alpha[i] for i in self.precedence)
        if self.kind == "grlex":
            return (sum(alpha), perm)
        return (sum(alpha), tuple(-e for e in reversed(perm)))

    def cmp(self, a, b) -> int:
        ka, kb = self.key(a), self.key(b)
        return (ka > kb) - (ka < kb)

    def max(self, exps):
        return max(exps, key=self.key)

    def sorted(self, exps, reverse=False):
        return sorted(exps, key=self.key, reverse=reverse)


def grevlex(nvars: int, precedence=None) -> TermOrder:
    if precedence is None:
        precedence = tuple(range(nvars))
    return TermOrder("grevlex", tuple(precedence))


def grlex(nvars: int, precedence=None) -> TermOrder:
    if precedence is None:
        precedence = tuple(range(nvars))
    return TermOrder("grlex", tuple(precedence))


def divides(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    """True iff the monomial with exponent a divides the one with exponent b."""
    return all(x <= y for x, y in zip(a, b))


def exp_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def exp_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def exp_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def unit_exp(nvars: int, i: int, k: int = 1) -> tuple[int, ...]:
    e = [0] * nvars
    e[i] = k
    return tuple(e)
