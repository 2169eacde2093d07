"""Exact sparse Laurent polynomials and rational expressions over the integers.

A Laurent polynomial in variables ``(v1, ..., vk)`` is stored as a dict
mapping integer exponent tuples to nonzero integer coefficients; the zero
polynomial is the empty dict.  All arithmetic is exact.  Multiplication of
large operands is routed through a Kronecker-substitution backend: each
polynomial is packed into a single big integer (one fixed-width digit per
point of the exponent box), multiplied with gmpy2, and unpacked with numpy.
Exact division uses the same packing when the operands are subtraction-free
and falls back to lexicographic long division, which is sound for Laurent
polynomials because candidate quotient exponents live in a bounded box.

A :class:`RationalExpression` is a quotient of two Laurent polynomials kept
in a light canonical form: monomial content is cancelled between numerator
and denominator (so both become honest polynomials with componentwise
minimum exponent zero), integer content is cancelled, and the sign is fixed
by making the lexicographically leading denominator coefficient positive.
Full multivariate gcd cancellation is deliberately *not* performed on every
operation; call :meth:`RationalExpression.reduced` when a fully cancelled
form is required.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod
import re

import gmpy2
import numpy as np

__all__ = [
    "LaurentPolynomial",
    "RationalExpression",
    "TermBudget",
    "BudgetExceeded",
    "NonExactDivision",
    "NotMonomialDenominator",
    "parse_polynomial",
    "parse_rational",
    "serialize_polynomial",
    "serialize_rational",
    "exact_div",
    "substitute",
    "extract_d_vector",
]

Exponent = tuple  # tuple[int, ...]


class NonExactDivision(ArithmeticError):
    """Raised when a Laurent polynomial division has a nonzero remainder."""


class NotMonomialDenominator(ValueError):
    """Raised when a rational expression unexpectedly has a non-monomial denominator."""


class BudgetExceeded(RuntimeError):
    """Raised when a symbolic computation exceeds its term-count budget."""


@dataclass
class TermBudget:
    """Cumulative term-count meter shared across one symbolic computation.

    Every freshly computed polynomial charges its term count; exceeding the
    ceiling aborts the computation with :class:`BudgetExceeded` instead of
    letting runaway expression swell hang the process.
    """

    limit: int = 1_000_000
    used: int = 0

    def charge(self, amount: int) -> None:
        self.used += amount
        if self.used > self.limit:
            raise BudgetExceeded(
                f"term budget exhausted: {self.used} terms used, limit {self.limit}"
            )


_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class LaurentPolynomial:
    """Sparse Laurent polynomial with integer coefficients.

    ``variables`` is the ordered tuple of variable names; ``terms`` maps
    exponent tuples (one integer per variable, negative allowed) to nonzero
    integer coefficients.  Instances are treated as immutable.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms):
        variables = tuple(variables)
        for name in variables:
            if not _NAME_RE.match(name):
                raise ValueError(f"invalid variable name {name!r}")
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables!r}")
        clean = {}
        width = len(variables)
        for exps, coeff in terms.items():
            if len(exps) != width:
                raise ValueError(
                    f"exponent tuple {exps!r} does not match {width} variables"
                )
            if coeff:
                clean[tuple(exps)] = coeff
        self.variables = variables
        self.terms = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, variables):
        return cls(variables, {})

    @classmethod
    def constant(cls, variables, value):
        variables = tuple(variables)
        if not value:
            return cls(variables, {})
        return cls(variables, {(0,) * len(variables): int(value)})

    @classmethod
    def monomial(cls, variables, exponents, coeff=1):
        return cls(variables, {tuple(exponents): coeff})

    @classmethod
    def variable(cls, variables, name):
        variables = tuple(variables)
        idx = variables.index(name)
        exps = tuple(1 if i == idx else 0 for i in range(len(variables)))
        return cls(variables, {exps: 1})

    # -- basic queries ---------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_one(self):
        return self.terms == {(0,) * len(self.variables): 1}

    def is_monomial(self):
        return len(self.terms) == 1

    def is_constant(self):
        return not self.terms or self.terms.keys() == {(0,) * len(self.variables)}

    def constant_value(self):
        if not self.is_constant():
            raise ValueError(f"not a constant polynomial: {self}")
        return self.terms.get((0,) * len(self.variables), 0)

    def term_count(self):
        return len(self.terms)

    def leading_term(self):
        """Lexicographically greatest exponent and its coefficient."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        exps = max(self.terms)
        return exps, self.terms[exps]

    def min_exponents(self):
        """Componentwise minimum exponent over all terms (zero poly: zeros)."""
        if not self.terms:
            return (0,) * len(self.variables)
        cols = zip(*self.terms)
        return tuple(min(col) for col in cols)

    def max_exponents(self):
        if not self.terms:
            return (0,) * len(self.variables)
        cols = zip(*self.terms)
        return tuple(max(col) for col in cols)

    def total_degree_if_homogeneous(self):
        """The common total degree of all terms, or None if inhomogeneous."""
        degs = {sum(e) for e in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def integer_content(self):
        value = 0
        for coeff in self.terms.values():
            value = gcd(value, coeff)
            if value == 1:
                return 1
        return value

    def max_abs_coeff(self):
        return max((abs(c) for c in self.terms.values()), default=0)

    # -- ring operations ---------------------------------------------------

    def _check_compatible(self, other):
        if self.variables != other.variables:
            raise ValueError(
                f"variable mismatch: {self.variables!r} vs {other.variables!r}"
            )

    def __add__(self, other):
        if isinstance(other, int):
            other = LaurentPolynomial.constant(self.variables, other)
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        self._check_compatible(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            new = terms.get(exps, 0) + coeff
            if new:
                terms[exps] = new
            else:
                terms.pop(exps, None)
        return LaurentPolynomial(self.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolynomial(
            self.variables, {e: -c for e, c in self.terms.items()}
        )

    def __sub__(self, other):
        if isinstance(other, int):
            other = LaurentPolynomial.constant(self.variables, other)
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            if not other:
                return LaurentPolynomial.zero(self.variables)
            return LaurentPolynomial(
                self.variables, {e: c * other for e, c in self.terms.items()}
            )
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        self._check_compatible(other)
        return _multiply(self, other)

    __rmul__ = __mul__

    def __pow__(self, power):
        power = int(power)
        if power < 0:
            if not self.is_monomial():
                raise ValueError(
                    "negative powers are only defined for monomials; "
                    "use RationalExpression for general inverses"
                )
            (exps, coeff), = self.terms.items()
            if abs(coeff) != 1:
                raise ValueError(
                    f"cannot invert monomial with coefficient {coeff} over the integers"
                )
            new_exps = tuple(e * power for e in exps)
            return LaurentPolynomial(
                self.variables, {new_exps: coeff if power % 2 else 1}
            )
        result = LaurentPolynomial.constant(self.variables, 1)
        base = self
        while power:
            if power & 1:
                result = result * base
            power >>= 1
            if power:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            return self.is_constant() and self.constant_value() == other
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __repr__(self):
        return f"LaurentPolynomial({serialize_polynomial(self)!r})"

    def __str__(self):
        return serialize_polynomial(self)

    # -- calculus and evaluation ------------------------------------------

    def diff(self, name):
        """Exact partial derivative with respect to the named variable."""
        idx = self.variables.index(name)
        terms = {}
        for exps, coeff in self.terms.items():
            k = exps[idx]
            if k:
                new = list(exps)
                new[idx] = k - 1
                key = tuple(new)
                terms[key] = terms.get(key, 0) + coeff * k
        return LaurentPolynomial(self.variables, terms)

    def eval_mod(self, point, prime):
        """Evaluate at a point with nonzero coordinates in GF(prime)."""
        total = 0
        values = [point[name] % prime for name in self.variables]
        for exps, coeff in self.terms.items():
            term = coeff % prime
            for value, e in zip(values, exps):
                if e:
                    term = term * pow(value, e, prime) % prime
            total = (total + term) % prime
        return total

    def eval_fraction(self, point):
        """Evaluate exactly at a point whose values are Fractions or ints."""
        total = Fraction(0)
        values = [Fraction(point[name]) for name in self.variables]
        for exps, coeff in self.terms.items():
            term = Fraction(coeff)
            for value, e in zip(values, exps):
                if e:
                    term *= value ** e
            total += term
        return total

    def with_variables(self, variables):
        """Re-express this polynomial over a superset of its variables."""
        variables = tuple(variables)
        positions = []
        for name in self.variables:
            if name not in variables:
                raise ValueError(f"variable {name!r} missing from {variables!r}")
            positions.append(variables.index(name))
        width = len(variables)
        terms = {}
        for exps, coeff in self.terms.items():
            new = [0] * width
            for pos, e in zip(positions, exps):
                new[pos] = e
            terms[tuple(new)] = coeff
        return LaurentPolynomial(variables, terms)


# -- multiplication backends ---------------------------------------------

_PACKED_THRESHOLD = 20_000  # pairwise term products above this use packing
_PACKED_MEMORY_LIMIT = 1 << 28  # bytes per packed operand


def _multiply(a, b, budget=None):
    if not a.terms or not b.terms:
        return LaurentPolynomial.zero(a.variables)
    pairs = len(a.terms) * len(b.terms)
    terms = None
    if pairs >= _PACKED_THRESHOLD:
        terms = _packed_mul_terms(a, b)
    if terms is None:
        terms = {}
        if len(a.terms) > len(b.terms):
            a, b = b, a
        for ea, ca in a.terms.items():
            for eb, cb in b.terms.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                new = terms.get(key, 0) + ca * cb
                if new:
                    terms[key] = new
                else:
                    del terms[key]
    result = LaurentPolynomial(a.variables, terms)
    if budget is not None:
        budget.charge(result.term_count())
    return result


def _split_signs(poly):
    pos = {}
    neg = {}
    for exps, coeff in poly.terms.items():
        if coeff > 0:
            pos[exps] = coeff
        else:
            neg[exps] = -coeff
    return pos, neg


def _packed_geometry(a, b):
    """Digit geometry for packing the product support of ``a * b``.

    Returns (drop_last, strides, mins_a, mins_b, positions, dims) where
    exponent tuples are projected to their first k-1 coordinates when both
    operands are homogeneous (the dropped coordinate is recovered from the
    total degree), or None when the exponent box is too large to pack.
    """
    deg_a = a.total_degree_if_homogeneous()
    deg_b = b.total_degree_if_homogeneous()
    drop = deg_a is not None and deg_b is not None and len(a.variables) >= 2

    def box(poly):
        lo = poly.min_exponents()
        hi = poly.max_exponents()
        if drop:
            lo, hi = lo[:-1], hi[:-1]
        return lo, hi

    amin, amax = box(a)
    bmin, bmax = box(b)
    dims = [
        (ah - al) + (bh - bl) + 1
        for al, ah, bl, bh in zip(amin, amax, bmin, bmax)
    ]
    positions = prod(dims)
    strides = []
    acc = 1
    for d in dims:
        strides.append(acc)
        acc *= d
    return drop, strides, amin, bmin, positions, deg_a, deg_b


def _pack(terms, mins, strides, drop, digit_bytes, positions):
    buf = bytearray(positions * digit_bytes)
    for exps, coeff in terms.items():
        if drop:
            exps = exps[:-1]
        pos = 0
        for e, m, s in zip(exps, mins, strides):
            pos += (e - m) * s
        off = pos * digit_bytes
        buf[off : off + digit_bytes] = coeff.to_bytes(digit_bytes, "little")
    return gmpy2.mpz(int.from_bytes(bytes(buf), "little"))


def _unpack(value, digit_bytes, positions, strides, mins_out, drop, total_degree, width):
    raw = int(value).to_bytes(positions * digit_bytes, "little")
    limbs = digit_bytes // 8
    arr = np.frombuffer(raw, dtype="<u8").reshape(positions, limbs)
    nonzero = np.nonzero(arr.any(axis=1))[0]
    terms = {}
    for pos in nonzero.tolist():
        coeff = 0
        for j in range(limbs - 1, -1, -1):
            coeff = (coeff << 64) | int(arr[pos, j])
        exps = []
        rem = pos
        for s, d_min in zip(reversed(strides), reversed(mins_out)):
            q, rem = divmod(rem, s)
            exps.append(q + d_min)
        exps.reverse()
        if drop:
            exps.append(total_degree - sum(exps))
        terms[tuple(exps)] = coeff
    return terms


def _packed_mul_terms(a, b):
    """Product terms of ``a * b`` via Kronecker packing, or None if unsuitable."""
    geometry = _packed_geometry(a, b)
    drop, strides, amin, bmin, positions, deg_a, deg_b = geometry
    bound = min(len(a.terms), len(b.terms)) * a.max_abs_coeff() * b.max_abs_coeff()
    digit_bytes = 8 * ((bound.bit_length() + 1 + 63) // 64)
    if positions * digit_bytes > _PACKED_MEMORY_LIMIT:
        return None
    mins_out = tuple(x + y for x, y in zip(amin, bmin))
    total = (deg_a + deg_b) if drop else None
    width = len(a.variables)
    a_pos, a_neg = _split_signs(a)
    b_pos, b_neg = _split_signs(b)
    packed = {}
    for label, part, mins in (
        ("a+", a_pos, amin),
        ("a-", a_neg, amin),
        ("b+", b_pos, bmin),
        ("b-", b_neg, bmin),
    ):
        if part:
            packed[label] = _pack(part, mins, strides, drop, digit_bytes, positions)
    terms = {}

    def accumulate(product, sign):
        part = _unpack(
            product, digit_bytes, positions, strides, mins_out, drop, total, width
        )
        for exps, coeff in part.items():
            new = terms.get(exps, 0) + sign * coeff
            if new:
                terms[exps] = new
            else:
                del terms[exps]

    for left, right, sign in (
        ("a+", "b+", 1),
        ("a-", "b-", 1),
        ("a+", "b-", -1),
        ("a-", "b+", -1),
    ):
        if left in packed and right in packed:
            accumulate(packed[left] * packed[right], sign)
    return terms


# -- exact division ---------------------------------------------------------


def exact_div(dividend, divisor, budget=None):
    """Exact quotient of Laurent polynomials; raises NonExactDivision otherwise.

    Subtraction-free inputs are divided through the packed big-integer
    backend (quotient verified by re-multiplication); the general case runs
    lexicographic long division with quotient exponents confined to the box
    ``[min(a) - max(b), max(a) - min(b)]``, which bounds the loop.
    """
    if not isinstance(dividend, LaurentPolynomial) or not isinstance(
        divisor, LaurentPolynomial
    ):
        raise TypeError("exact_div expects LaurentPolynomial operands")
    dividend._check_compatible(divisor)
    if divisor.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if dividend.is_zero():
        return dividend
    if divisor.is_monomial():
        (exps, coeff), = divisor.terms.items()
        terms = {}
        for e, c in dividend.terms.items():
            q, r = divmod(c, coeff)
            if r:
                raise NonExactDivision(
                    f"coefficient {c} not divisible by {coeff}"
                )
            terms[tuple(x - y for x, y in zip(e, exps))] = q
        result = LaurentPolynomial(dividend.variables, terms)
        if budget is not None:
            budget.charge(result.term_count())
        return result
    quotient = None
    if (
        len(dividend.terms) * len(divisor.terms) >= _PACKED_THRESHOLD
        and all(c > 0 for c in dividend.terms.values())
        and all(c > 0 for c in divisor.terms.values())
    ):
        quotient = _packed_div(dividend, divisor)
    if quotient is None:
        quotient = _long_div(dividend, divisor)
    if budget is not None:
        budget.charge(quotient.term_count())
    return quotient


def _packed_div(dividend, divisor):
    """Positive-coefficient exact division via integer division, or None.

    Sound because the verification step re-multiplies the decoded quotient:
    a decode corrupted by digit overflow cannot reproduce the dividend.
    """
    geometry = _packed_geometry(dividend, divisor)
    drop, strides, amin, bmin, positions, deg_a, deg_b = geometry
    bound = dividend.max_abs_coeff() * max(
        1, len(divisor.terms) * divisor.max_abs_coeff()
    )
    digit_bytes = 8 * ((bound.bit_length() + 9 + 63) // 64)
    if positions * digit_bytes > _PACKED_MEMORY_LIMIT:
        return None
    a_int = _pack(dividend.terms, amin, strides, drop, digit_bytes, positions)
    b_int = _pack(divisor.terms, bmin, strides, drop, digit_bytes, positions)
    q_int, r_int = gmpy2.f_divmod(a_int, b_int)
    if r_int:
        raise NonExactDivision(
            f"remainder left when dividing by {serialize_polynomial(divisor)}"
        )
    mins_q = tuple(x - y for x, y in zip(amin, bmin))
    total = (deg_a - deg_b) if drop else None
    terms = _unpack(
        q_int,
        digit_bytes,
        positions,
        strides,
        mins_q,
        drop,
        total,
        len(dividend.variables),
    )
    quotient = LaurentPolynomial(dividend.variables, terms)
    if _multiply(quotient, divisor) != dividend:
        return None
    return quotient


def _long_div(dividend, divisor):
    variables = dividend.variables
    lead_exps, lead_coeff = divisor.leading_term()
    lo_box = tuple(
        a - b for a, b in zip(dividend.min_exponents(), divisor.max_exponents())
    )
    hi_box = tuple(
        a - b for a, b in zip(dividend.max_exponents(), divisor.min_exponents())
    )
    remainder = dict(dividend.terms)
    quotient = {}
    divisor_rest = [
        (e, c) for e, c in divisor.terms.items() if e != lead_exps
    ]
    while remainder:
        exps = max(remainder)
        coeff = remainder.pop(exps)
        q_coeff, q_rem = divmod(coeff, lead_coeff)
        step = tuple(x - y for x, y in zip(exps, lead_exps))
        if q_rem or any(s < lo or s > hi for s, lo, hi in zip(step, lo_box, hi_box)):
            raise NonExactDivision(
                f"division of {serialize_polynomial(dividend)} by "
                f"{serialize_polynomial(divisor)} is not exact"
            )
        quotient[step] = q_coeff
        for e, c in divisor_rest:
            key = tuple(x + y for x, y in zip(step, e))
            new = remainder.get(key, 0) - q_coeff * c
            if new:
                remainder[key] = new
            else:
                remainder.pop(key, None)
    return LaurentPolynomial(variables, quotient)


# -- rational expressions ----------------------------------------------------


class RationalExpression:
    """Quotient of Laurent polynomials in light canonical form.

    Invariants after construction: the denominator is nonzero, both parts
    are honest polynomials whose componentwise minimum exponent over the
    pair is zero, integer content shared between the parts is cancelled,
    and the lexicographically leading denominator coefficient is positive.
    """

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator, denominator=None):
        if denominator is None:
            denominator = LaurentPolynomial.constant(numerator.variables, 1)
        if isinstance(numerator, int):
            numerator = LaurentPolynomial.constant(denominator.variables, numerator)
        if isinstance(denominator, int):
            denominator = LaurentPolynomial.constant(
                numerator.variables, denominator
            )
        numerator._check_compatible(denominator)
        if denominator.is_zero():
            raise ZeroDivisionError("rational expression with zero denominator")
        if numerator.is_zero():
            self.numerator = numerator
            self.denominator = LaurentPolynomial.constant(numerator.variables, 1)
            return
        shift = tuple(
            min(a, b)
            for a, b in zip(numerator.min_exponents(), denominator.min_exponents())
        )
        if any(shift):
            numerator = _shift(numerator, shift)
            denominator = _shift(denominator, shift)
        content = gcd(numerator.integer_content(), denominator.integer_content())
        if content > 1:
            numerator = LaurentPolynomial(
                numerator.variables,
                {e: c // content for e, c in numerator.terms.items()},
            )
            denominator = LaurentPolynomial(
                denominator.variables,
                {e: c // content for e, c in denominator.terms.items()},
            )
        if denominator.leading_term()[1] < 0:
            numerator = -numerator
            denominator = -denominator
        self.numerator = numerator
        self.denominator = denominator

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_polynomial(cls, poly):
        return cls(poly)

    @classmethod
    def constant(cls, variables, value):
        return cls(LaurentPolynomial.constant(variables, value))

    @classmethod
    def variable(cls, variables, name):
        return cls(LaurentPolynomial.variable(variables, name))

    @property
    def variables(self):
        return self.numerator.variables

    # -- queries -------------------------------------------------------------

    def is_zero(self):
        return self.numerator.is_zero()

    def is_laurent(self):
        return self.denominator.is_monomial()

    def to_laurent(self):
        """This expression as a plain Laurent polynomial.

        Requires a monomial denominator; raises NotMonomialDenominator
        otherwise.  (Use ``reduced()`` first if cancellation might expose
        a monomial denominator.)
        """
        if not self.denominator.is_monomial():
            raise NotMonomialDenominator(
                f"denominator {self.denominator} is not a monomial"
            )
        (exps, coeff), = self.denominator.terms.items()
        terms = {}
        for e, c in self.numerator.terms.items():
            q, r = divmod(c, coeff)
            if r:
                raise NotMonomialDenominator(
                    f"coefficient {c} not divisible by denominator coefficient {coeff}"
                )
            terms[tuple(x - y for x, y in zip(e, exps))] = q
        return LaurentPolynomial(self.variables, terms)

    def term_count(self):
        return self.numerator.term_count() + self.denominator.term_count()

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RationalExpression):
            return other
        if isinstance(other, LaurentPolynomial):
            return RationalExpression(other)
        if isinstance(other, int):
            return RationalExpression.constant(self.variables, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        num = self.numerator * other.denominator + other.numerator * self.denominator
        den = self.denominator * other.denominator
        return RationalExpression(num, den)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpression(-self.numerator, self.denominator)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RationalExpression(
            self.numerator * other.numerator, self.denominator * other.denominator
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational expression")
        return RationalExpression(
            self.numerator * other.denominator, self.denominator * other.numerator
        )

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, power):
        power = int(power)
        if power < 0:
            return RationalExpression(self.denominator, self.numerator) ** (-power)
        result = RationalExpression.constant(self.variables, 1)
        base = self
        while power:
            if power & 1:
                result = result * base
            power >>= 1
            if power:
                base = base * base
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (
            self.numerator == other.numerator
            and self.denominator == other.denominator
        )

    def __hash__(self):
        return hash((self.numerator, self.denominator))

    def __repr__(self):
        return f"RationalExpression({serialize_rational(self)!r})"

    def __str__(self):
        return serialize_rational(self)

    # -- calculus and evaluation ----------------------------------------------

    def diff(self, name):
        """Quotient-rule derivative; no cancellation is attempted."""
        num = (
            self.numerator.diff(name) * self.denominator
            - self.numerator * self.denominator.diff(name)
        )
        den = self.denominator * self.denominator
        return RationalExpression(num, den)

    def eval_mod(self, point, prime):
        den = self.denominator.eval_mod(point, prime)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at sample point")
        num = self.numerator.eval_mod(point, prime)
        return num * pow(den, -1, prime) % prime

    def eval_fraction(self, point):
        den = self.denominator.eval_fraction(point)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at sample point")
        return self.numerator.eval_fraction(point) / den

    def with_variables(self, variables):
        return RationalExpression(
            self.numerator.with_variables(variables),
            self.denominator.with_variables(variables),
        )

    def reduced(self):
        """Fully cancelled form (multivariate gcd); potentially expensive.

        gcd extraction is delegated to sympy, which is mature and exact;
        everything else in this module stays on the native representation.
        """
        if self.denominator.is_monomial() or self.numerator.is_zero():
            return self
        import sympy

        symbols = sympy.symbols(self.variables)
        if len(self.variables) == 1:
            symbols = (symbols,)

        def to_sympy(poly):
            expr = sympy.Integer(0)
            for exps, coeff in poly.terms.items():
                term = sympy.Integer(coeff)
                for s, e in zip(symbols, exps):
                    term *= s ** e
                expr += term
            return sympy.expand(expr)

        g = sympy.gcd(to_sympy(self.numerator), to_sympy(self.denominator))
        if g == 1:
            return self
        g_poly = _from_sympy(g, self.variables)
        return RationalExpression(
            exact_div(self.numerator, g_poly), exact_div(self.denominator, g_poly)
        )


def _shift(poly, shift):
    return LaurentPolynomial(
        poly.variables,
        {tuple(x - s for x, s in zip(e, shift)): c for e, c in poly.terms.items()},
    )


def _from_sympy(expr, variables):
    import sympy

    poly = sympy.Poly(expr, *sympy.symbols(variables))
    terms = {}
    for monom, coeff in poly.terms():
        terms[tuple(int(m) for m in monom)] = int(coeff)
    return LaurentPolynomial(variables, terms)


def substitute(expr, assignments, variables=None, budget=None):
    """Substitute rational expressions for variables.

    ``assignments`` maps variable names to RationalExpression values (all
    over one common variable tuple); unassigned variables map to themselves,
    so they must be present in the target variable tuple.  Returns a
    RationalExpression over the target variables.
    """
    if isinstance(expr, LaurentPolynomial):
        expr = RationalExpression(expr)
    if variables is None:
        for value in assignments.values():
            variables = value.variables
            break
        else:
            variables = expr.variables
    target = {}
    for name in expr.variables:
        if name in assignments:
            target[name] = assignments[name].with_variables(variables)
        else:
            target[name] = RationalExpression.variable(variables, name)

    def apply(poly):
        total = RationalExpression.constant(variables, 0)
        for exps, coeff in poly.terms.items():
            term = RationalExpression.constant(variables, coeff)
            for name, e in zip(expr.variables, exps):
                if e:
                    term = term * target[name] ** e
            total = total + term
            if budget is not None:
                budget.charge(total.term_count())
        return total

    return apply(expr.numerator) / apply(expr.denominator)


def extract_d_vector(expr):
    """Denominator exponent vector of a Laurent-form rational expression.

    For a cluster variable written over the initial cluster, component i is
    the exponent of variable i in the denominator of the reduced Laurent
    form.  Raises NotMonomialDenominator when the expression is not Laurent.
    """
    if isinstance(expr, LaurentPolynomial):
        lp = expr
    else:
        lp = expr.to_laurent()
    mins = lp.min_exponents()
    return tuple(-m for m in mins)


# -- canonical text form ------------------------------------------------------


def serialize_polynomial(poly):
    """Canonical text: terms ascending in lexicographic exponent order.

    Examples: ``0``, ``3``, ``x1^-1*x2^2 + 3``, ``x1 - 2*x2``.
    Round-trips exactly through :func:`parse_polynomial`.
    """
    if not poly.terms:
        return "0"
    pieces = []
    for exps in sorted(poly.terms):
        coeff = poly.terms[exps]
        factors = []
        for name, e in zip(poly.variables, exps):
            if e == 1:
                factors.append(name)
            elif e:
                factors.append(f"{name}^{e}")
        mag = abs(coeff)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        pieces.append((coeff < 0, body))
    first_neg, first_body = pieces[0]
    out = [("-" if first_neg else "") + first_body]
    for neg, body in pieces[1:]:
        out.append(" - " if neg else " + ")
        out.append(body)
    return "".join(out)


def serialize_rational(expr):
    """Canonical text for a rational expression: ``num`` or ``(num)/(den)``."""
    num_text = serialize_polynomial(expr.numerator)
    if expr.denominator.is_one():
        return num_text
    return f"({num_text})/({serialize_polynomial(expr.denominator)})"


_FACTOR_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")


def parse_polynomial(text, variables):
    """Parse the canonical text form back into a LaurentPolynomial."""
    variables = tuple(variables)
    index = {name: i for i, name in enumerate(variables)}
    width = len(variables)
    compact = text.replace(" ", "")
    if not compact:
        raise ValueError("empty polynomial text")
    chunks = []
    start = 0
    for i, ch in enumerate(compact):
        if ch in "+-" and i > start and compact[i - 1] not in "^*+-":
            chunks.append(compact[start:i])
            start = i
    chunks.append(compact[start:])
    terms = {}
    for chunk in chunks:
        sign = 1
        if chunk.startswith("-"):
            sign = -1
            chunk = chunk[1:]
        elif chunk.startswith("+"):
            chunk = chunk[1:]
        if not chunk:
            raise ValueError(f"malformed term in {text!r}")
        coeff = sign
        exps = [0] * width
        for factor in chunk.split("*"):
            if factor.lstrip("-").isdigit():
                coeff *= int(factor)
                continue
            match = _FACTOR_RE.match(factor)
            if not match:
                raise ValueError(f"malformed factor {factor!r} in {text!r}")
            name, power = match.group(1), match.group(2)
            if name not in index:
                raise ValueError(f"unknown variable {name!r} in {text!r}")
            exps[index[name]] += int(power) if power is not None else 1
        key = tuple(exps)
        new = terms.get(key, 0) + coeff
        if new:
            terms[key] = new
        else:
            terms.pop(key, None)
    return LaurentPolynomial(variables, terms)


def parse_rational(text, variables):
    """Parse ``num`` or ``(num)/(den)`` into a RationalExpression."""
    stripped = text.strip()
    if stripped.startswith("(") and ")/(" in stripped and stripped.endswith(")"):
        num_text, den_text = stripped[1:-1].split(")/(", 1)
        return RationalExpression(
            parse_polynomial(num_text, variables),
            parse_polynomial(den_text, variables),
        )
    return RationalExpression(parse_polynomial(stripped, variables))
