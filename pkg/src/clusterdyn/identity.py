"""Exact and probabilistic equality testing for rational expressions.

Small expressions are compared exactly by cross-multiplying.  Large ones
are compared by evaluating both sides at uniformly random nonzero points of
a prime field of size near ``2**61`` and comparing; by the Schwartz-Zippel
bound each round that passes leaves a false-accept probability of at most
``D / (PRIME - 1)`` where ``D`` bounds the total degree of the polynomial
cross-difference, so the reported error bound shrinks geometrically with
the round count.  A disagreement at any sample point is an exact witness of
inequality, so ``equal=False`` results are always definitive.

Sampling is deterministic given the seed.  Points where a denominator
vanishes are resampled; persistent vanishing raises SingularSampling so
callers can distinguish a degenerate locus from an answer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import log2

from .laurent import LaurentPolynomial, RationalExpression

__all__ = [
    "PRIME",
    "IdentityResult",
    "SingularSampling",
    "identity_test",
    "sample_point",
]

PRIME = 2**61 - 1  # Mersenne prime; sample coordinates are drawn from 1..PRIME-1

DEFAULT_ROUNDS = 8
EXACT_TERM_BOUND = 10_000


class SingularSampling(RuntimeError):
    """Raised when random sampling keeps hitting vanishing denominators."""


@dataclass(frozen=True)
class IdentityResult:
    """Outcome of an identity test.

    ``log2_error_bound`` bounds the probability that ``equal=True`` is wrong
    (zero, i.e. ``-inf`` is reported as ``None``, for the exact method and
    for definitive inequality).
    """

    equal: bool
    method: str  # "exact" or "probabilistic"
    rounds: int
    log2_error_bound: float | None

    def __bool__(self):
        return self.equal


def sample_point(variables, rng, prime=PRIME):
    """A random evaluation point with nonzero coordinates mod ``prime``."""
    return {name: rng.randrange(1, prime) for name in variables}


def _as_rational(expr):
    if isinstance(expr, RationalExpression):
        return expr
    if isinstance(expr, LaurentPolynomial):
        return RationalExpression(expr)
    raise TypeError(f"cannot identity-test object of type {type(expr).__name__}")


def _poly_degree_bound(poly):
    """Total degree of the polynomial obtained by clearing minimum exponents."""
    if not poly.terms:
        return 0
    mins = poly.min_exponents()
    return max(sum(e - m for e, m in zip(exps, mins)) for exps in poly.terms)


def identity_test(
    lhs,
    rhs,
    *,
    rounds=DEFAULT_ROUNDS,
    seed=0,
    exact_term_bound=EXACT_TERM_BOUND,
    max_retries=64,
):
    """Decide whether two rational expressions are identically equal.

    Returns an :class:`IdentityResult`; its truthiness is the verdict.
    """
    lhs = _as_rational(lhs)
    rhs = _as_rational(rhs)
    if lhs.variables != rhs.variables:
        merged = tuple(lhs.variables) + tuple(
            v for v in rhs.variables if v not in lhs.variables
        )
        lhs = lhs.with_variables(merged)
        rhs = rhs.with_variables(merged)
    n1, d1 = lhs.numerator, lhs.denominator
    n2, d2 = rhs.numerator, rhs.denominator
    cross_terms = len(n1.terms) * len(d2.terms) + len(n2.terms) * len(d1.terms)
    if cross_terms <= exact_term_bound:
        equal = (n1 * d2 - n2 * d1).is_zero()
        return IdentityResult(equal, "exact", 0, None)
    rng = random.Random(seed)
    degree = max(
        _poly_degree_bound(n1) + _poly_degree_bound(d2),
        _poly_degree_bound(n2) + _poly_degree_bound(d1),
    )
    per_round = max(degree, 1) / (PRIME - 1)
    retries = 0
    completed = 0
    for _ in range(rounds):
        while True:
            point = sample_point(lhs.variables, rng)
            v_d1 = d1.eval_mod(point, PRIME)
            v_d2 = d2.eval_mod(point, PRIME)
            if v_d1 and v_d2:
                break
            retries += 1
            if retries > max_retries:
                raise SingularSampling(
                    f"denominators vanished at {retries} sample points; "
                    "the comparison locus appears degenerate"
                )
        v_n1 = n1.eval_mod(point, PRIME)
        v_n2 = n2.eval_mod(point, PRIME)
        completed += 1
        if v_n1 * v_d2 % PRIME != v_n2 * v_d1 % PRIME:
            return IdentityResult(False, "probabilistic", completed, None)
    bound = completed * log2(per_round) if per_round > 0 else None
    return IdentityResult(True, "probabilistic", completed, bound)
