"""Cluster mutation-periodicity: detection, construction, and recurrences.

An exchange matrix B is cluster mutation-periodic with period m when the
composite mutation ``mu_m . ... . mu_1`` reproduces B up to the cyclic
relabelling ``rho^m`` with ``rho(i) = i - 1`` (wrapping 1 to N), i.e.
``mu_m ... mu_1 (B) = rho^m(B)`` entrywise with
``rho(B)_ij = B_{rho(i), rho(j)}``.  Iterating the composite then generates
a single scalar recurrence of order N:

    x_n * x_{n+N} = prod_j x_{n+j}^{p_j} + prod_j x_{n+j}^{q_j}

whose exponents are read off the first rows mutated during one period.  For
period 1 the exponents come from one palindromic integer vector
``(a_1, ..., a_{N-1})`` with ``a_j = a_{N-j}`` via ``p_j = max(a_j, 0)``
and ``q_j = max(-a_j, 0)``; conversely every such palindrome determines a
period-1 matrix through the triangle recursion

    b_{1, j+1} = a_j,
    b_{i+1, j+1} = b_{i, j} + a_i [-a_j]_+ - a_j [-a_i]_+ ,

which this module implements and re-validates (the constructed matrix is
asserted to detect as period 1 rather than assumed).

Recurrences optionally carry frozen multipliers: named symbols attached
with fixed exponents to the plus and minus monomials of the exchange
relation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .laurent import LaurentPolynomial, exact_div
from .seeds import ExchangeMatrix, matrix_mutate, rotation_permutation

__all__ = [
    "SingularOrbit",
    "detect_period",
    "is_palindrome",
    "matrix_from_palindrome",
    "palindrome_from_matrix",
    "RecurrenceSpec",
    "MutationCycle",
    "iterate_numeric",
    "iterate_symbolic",
]


class SingularOrbit(ArithmeticError):
    """An orbit hit a zero value where the recurrence divides by it."""

    def __init__(self, position, message=None):
        self.position = position
        super().__init__(
            message or f"orbit is singular: division by zero at position {position}"
        )


def detect_period(matrix, max_period=None):
    """Smallest m with ``mu_m ... mu_1 (B) = rho^m(B)``, or None.

    Periods up to ``max_period`` (default: the matrix size) are tried.
    None is an answer, not an error: the matrix is simply not cluster
    mutation-periodic within the searched range.
    """
    rows = matrix.rows if isinstance(matrix, ExchangeMatrix) else tuple(
        tuple(int(x) for x in row) for row in matrix
    )
    n = len(rows)
    limit = n if max_period is None else max_period
    mutated = rows
    for m in range(1, limit + 1):
        mutated = matrix_mutate(mutated, m)
        perm = [p - 1 for p in rotation_permutation(n, m)]
        rotated = tuple(
            tuple(rows[perm[i]][perm[j]] for j in range(n)) for i in range(n)
        )
        if mutated == rotated:
            return m
    return None


def is_palindrome(coeffs):
    coeffs = tuple(int(c) for c in coeffs)
    return coeffs == coeffs[::-1]


def matrix_from_palindrome(coeffs):
    """Period-1 exchange matrix built from a palindromic coefficient vector.

    ``coeffs`` is ``(a_1, ..., a_{N-1})`` with ``a_j = a_{N-j}``.  The
    result is validated: skew-symmetry of the filled matrix and detected
    period 1 are checked, not assumed.
    """
    a = tuple(int(c) for c in coeffs)
    if not a:
        raise ValueError("palindrome must have at least one coefficient")
    if not is_palindrome(a):
        raise ValueError(f"coefficient vector {a!r} is not palindromic")
    n = len(a) + 1
    b = [[0] * n for _ in range(n)]
    for j in range(1, n):
        b[0][j] = a[j - 1]
        b[j][0] = -a[j - 1]
    for i in range(1, n):
        for j in range(1, n):
            a_i = a[i - 1]
            a_j = a[j - 1]
            b[i][j] = b[i - 1][j - 1] + a_i * max(-a_j, 0) - a_j * max(-a_i, 0)
    for i in range(n):
        if b[i][i] != 0:
            raise ValueError(
                f"palindrome {a!r} produced nonzero diagonal entry at {i + 1}"
            )
        for j in range(n):
            if b[i][j] != -b[j][i]:
                raise ValueError(
                    f"palindrome {a!r} produced a non-skew-symmetric matrix"
                )
    matrix = ExchangeMatrix(b)
    if detect_period(matrix, max_period=1) != 1:
        raise ValueError(
            f"palindrome {a!r} produced a matrix that is not period 1"
        )
    return matrix


def palindrome_from_matrix(matrix):
    """First-row coefficients of a period-1 matrix (inverse of construction)."""
    if detect_period(matrix, max_period=1) != 1:
        raise ValueError("matrix is not cluster mutation-periodic with period 1")
    rows = matrix.rows if isinstance(matrix, ExchangeMatrix) else matrix
    return tuple(rows[0][1:])


@dataclass(frozen=True)
class RecurrenceSpec:
    """Scalar recurrence ``x_n x_{n+order} = A * plus + G * minus``.

    ``plus`` and ``minus`` map window offsets ``j`` (1-based, j < order) to
    positive exponents; ``multipliers`` maps frozen symbol names to the
    exponent pair they carry on (plus, minus).  ``A`` and ``G`` above are
    the products of those symbol powers.
    """

    order: int
    plus: tuple  # ((offset, exponent), ...)
    minus: tuple
    multipliers: tuple = ()  # ((name, plus_exp, minus_exp), ...)

    @classmethod
    def from_parts(cls, order, plus, minus, multipliers=None):
        def normalize(part):
            items = sorted((int(j), int(e)) for j, e in dict(part).items())
            for j, e in items:
                if not 1 <= j < order:
                    raise ValueError(f"offset {j} outside window 1..{order - 1}")
                if e <= 0:
                    raise ValueError(f"nonpositive exponent {e} at offset {j}")
            return tuple(items)

        mults = tuple(
            (str(name), int(p), int(m))
            for name, (p, m) in (multipliers or {}).items()
        )
        return cls(order, normalize(plus), normalize(minus), mults)

    @classmethod
    def from_palindrome(cls, coeffs, multipliers=None):
        coeffs = tuple(int(c) for c in coeffs)
        if not is_palindrome(coeffs):
            raise ValueError(f"coefficient vector {coeffs!r} is not palindromic")
        plus = {j: c for j, c in enumerate(coeffs, start=1) if c > 0}
        minus = {j: -c for j, c in enumerate(coeffs, start=1) if c < 0}
        return cls.from_parts(len(coeffs) + 1, plus, minus, multipliers)

    @property
    def coefficients(self):
        """The signed exponent vector ``(a_1, ..., a_{order-1})`` if disjoint."""
        a = [0] * (self.order - 1)
        for j, e in self.plus:
            a[j - 1] += e
        for j, e in self.minus:
            if a[j - 1]:
                raise ValueError(
                    "plus and minus supports overlap; no signed vector exists"
                )
            a[j - 1] -= e
        return tuple(a)

    def multiplier_names(self):
        return tuple(name for name, _, _ in self.multipliers)

    def step_numeric(self, window, params):
        plus = Fraction(1)
        minus = Fraction(1)
        for name, p_exp, m_exp in self.multipliers:
            value = Fraction(params[name])
            plus *= value**p_exp
            minus *= value**m_exp
        for j, e in self.plus:
            plus *= Fraction(window[j]) ** e
        for j, e in self.minus:
            minus *= Fraction(window[j]) ** e
        return plus + minus, Fraction(window[0])


def iterate_numeric(spec, inits, steps, params=None, predicate=None):
    """Exact orbit of a recurrence from rational initial values.

    Returns the full list ``[x_1, ..., x_{len(inits) + steps}]``.  A zero
    divisor raises SingularOrbit with the 1-based position of the offending
    value.
    """
    params = dict(params or {})
    values = [Fraction(v) for v in inits]
    if len(values) != spec.order:
        raise ValueError(
            f"need {spec.order} initial values, got {len(values)}"
        )
    for n in range(steps):
        window = values[n : n + spec.order]
        numerator, divisor = spec.step_numeric(window, params)
        if divisor == 0:
            raise SingularOrbit(n + 1)
        values.append(numerator / divisor)
    return values


def iterate_symbolic(spec, steps, budget=None):
    """Symbolic orbit: Laurent polynomials in the initial window variables.

    Multiplier symbols join the ring, so iterates are Laurent in
    ``x1..xN`` with polynomial dependence on the multipliers.  Each new
    value is produced by exact division, so Laurentness is verified at
    every step rather than assumed.
    """
    n = spec.order
    variables = tuple(
        [f"x{i}" for i in range(1, n + 1)] + list(spec.multiplier_names())
    )
    width = len(variables)

    def unit_exps(idx):
        return tuple(1 if i == idx else 0 for i in range(width))

    values = [
        LaurentPolynomial.monomial(variables, unit_exps(i)) for i in range(n)
    ]
    plus_mult = [0] * width
    minus_mult = [0] * width
    for offset, (name, p_exp, m_exp) in enumerate(spec.multipliers):
        plus_mult[n + offset] = p_exp
        minus_mult[n + offset] = m_exp
    for step in range(steps):
        window = values[step : step + n]
        plus = LaurentPolynomial.monomial(variables, tuple(plus_mult))
        minus = LaurentPolynomial.monomial(variables, tuple(minus_mult))
        for j, e in spec.plus:
            plus = plus * window[j] ** e
        for j, e in spec.minus:
            minus = minus * window[j] ** e
        values.append(exact_div(plus + minus, window[0], budget=budget))
    return values


@dataclass(frozen=True)
class MutationCycle:
    """One period of the composite mutation, with window relabelling.

    ``apply`` mutates along directions ``1..period`` and then relabels so
    the seed becomes the period-shifted window: position i holds what was
    at position i + period (new variables occupy the last positions).
    """

    period: int

    def directions(self):
        return tuple(range(1, self.period + 1))

    def apply(self, seed, budget=None):
        for k in self.directions():
            seed = seed.mutate(k, budget=budget)
        return seed.relabel(rotation_permutation(seed.n, -self.period))

    def new_values(self, seed):
        """The cluster entries created by the last ``apply`` call."""
        return seed.cluster[seed.n - self.period :]
