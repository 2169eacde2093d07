"""Conserved quantities, involutivity, Lax pairs, and integrability verdicts.

A map on an N-dimensional space carrying an invariant Poisson bracket of
rank 2m is certified completely integrable when it preserves N - m
functionally independent functions in involution, including the Casimirs
of the bracket.  This module verifies first integrals by exact identity
testing, evaluates brackets of rational functions, detects linear relations
with constant/periodic/bilinear coefficients along orbits, builds the 3x3
Lax pair of the fourth-order bilinear map (the two-term Somos-6 recurrence
in reduced coordinates) with its spectral curve, and assembles the verdict.
The verdict is asymmetric by design: absence of found integrals proves
nothing, so the only outcomes are "completely-integrable" and
"not-established".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import random

from .identity import identity_test
from .laurent import (
    LaurentPolynomial,
    RationalExpression,
    serialize_rational,
    substitute,
)
from .linalg import invert, rank, to_fraction_matrix
from .periodicity import RecurrenceSpec
from .structures import (
    PoissonStructure,
    USystemSpec,
    casimir_monomials,
    poisson_bracket,
    shift_map_images,
    usystem_map_images,
)

__all__ = [
    "FirstIntegral",
    "LinearRelation",
    "LaxPair",
    "SpectralCurve",
    "ShapeMismatch",
    "IntegrabilityVerdict",
    "map_images",
    "verify_first_integral",
    "bracket_from_reduced",
    "bracket_eval",
    "detect_linear_relation",
    "somos6_lax_pair",
    "lax_check",
    "spectral_curve",
    "collect_by_exponents",
    "integrability_report",
]


class ShapeMismatch(ValueError):
    """Characteristic polynomial support differs from the expected curve."""


@dataclass(frozen=True)
class FirstIntegral:
    """A named window function verified to be preserved by a map."""

    name: str
    expression: RationalExpression
    order: int

    @classmethod
    def verified(cls, map_spec, name, expression, *, seed=0):
        """Construct only if the expression is invariant under the map."""
        integral = cls(name, expression, _map_order(map_spec))
        if not verify_first_integral(map_spec, expression, seed=seed):
            raise ValueError(f"{name} is not preserved by the map")
        return integral

    def to_json(self):
        return {
            "name": self.name,
            "expression": serialize_rational(self.expression),
            "order": self.order,
        }


def _map_order(map_spec):
    return map_spec.order


def map_images(map_spec):
    """(images, coordinate names) of the shift map of a recurrence/U-system."""
    if isinstance(map_spec, RecurrenceSpec):
        coordinates = tuple(f"x{i}" for i in range(1, map_spec.order + 1))
        return shift_map_images(map_spec, coordinates), coordinates
    if isinstance(map_spec, USystemSpec):
        coordinates = tuple(f"u{i}" for i in range(1, map_spec.order + 1))
        return usystem_map_images(map_spec, coordinates), coordinates
    raise TypeError(f"cannot build map images from {type(map_spec).__name__}")


def _compose(expression, images, coordinates):
    """expression(f_1, ..., f_N) with multiplier names passed through."""
    universe = images[0].numerator.variables
    assignments = {name: images[i] for i, name in enumerate(coordinates)}
    for name in expression.numerator.variables:
        if name not in assignments:
            assignments[name] = RationalExpression.variable(universe, name)
    return substitute(expression, assignments, universe)


def verify_first_integral(map_spec, integral, *, rounds=8, seed=0):
    """Exact/probabilistic test that the function is invariant under the map."""
    expression = (
        integral.expression
        if isinstance(integral, FirstIntegral)
        else integral
    )
    images, coordinates = map_images(map_spec)
    pulled = _compose(expression, images, coordinates)
    universe = images[0].numerator.variables
    target = substitute(
        expression,
        {
            name: RationalExpression.variable(universe, name)
            for name in expression.numerator.variables
        },
        universe,
    )
    return identity_test(pulled, target, rounds=rounds, seed=seed).equal


def bracket_from_reduced(reduced):
    """Nondegenerate bracket on u-coordinates: (p_ij) = B-hat^{-1}."""
    rows = to_fraction_matrix([list(r) for r in reduced])
    try:
        inverse = invert(rows)
    except ValueError as exc:
        raise ValueError("reduced exchange matrix is singular") from exc
    return PoissonStructure(tuple(tuple(row) for row in inverse))


def bracket_eval(structure, f, g, coordinates):
    """{f, g} for the log-canonical structure on the named coordinates."""
    return poisson_bracket(f, g, structure, coordinates)


@dataclass(frozen=True)
class LinearRelation:
    """Detected relation along an orbit, with its verified coefficients."""

    shape: str  # constant | periodic | bilinear
    coefficients: tuple
    lag: int | None = None
    period: int | None = None

    def to_json(self):
        return {
            "shape": self.shape,
            "coefficients": [str(c) for c in self.coefficients],
            "lag": self.lag,
            "period": self.period,
        }


def detect_linear_relation(orbit, shape, *, lag=None, period=None):
    """Solve and verify a relation of the given shape, or None.

    * constant (needs ``lag`` L):  x_{n+2L} + x_n = K x_{n+L}
    * periodic (needs ``period`` p):  x_{n+2} - J_n x_{n+1} + x_n = 0 with
      J_{n+p} = J_n
    * bilinear:  x_{n+3} + x_n = K x_{n+1} x_{n+2}
    """
    values = [Fraction(v) for v in orbit]
    if shape == "constant":
        if lag is None:
            raise ValueError("constant shape needs a lag")
        span = 2 * lag
        if len(values) < span + 2:
            return None
        k = None
        for n in range(len(values) - span):
            if values[n + lag] != 0:
                k = (values[n] + values[n + span]) / values[n + lag]
                break
        if k is None:
            return None
        for n in range(len(values) - span):
            if values[n] + values[n + span] != k * values[n + lag]:
                return None
        return LinearRelation("constant", (k,), lag=lag)
    if shape == "periodic":
        if period is None:
            raise ValueError("periodic shape needs a period")
        if len(values) < period + 3:
            return None
        coeffs = [None] * period
        for n in range(len(values) - 2):
            if values[n + 1] != 0 and coeffs[n % period] is None:
                coeffs[n % period] = (values[n] + values[n + 2]) / values[n + 1]
        if any(c is None for c in coeffs):
            return None
        for n in range(len(values) - 2):
            j = coeffs[n % period]
            if values[n + 2] - j * values[n + 1] + values[n] != 0:
                return None
        return LinearRelation("periodic", tuple(coeffs), period=period)
    if shape == "bilinear":
        if len(values) < 5:
            return None
        k = None
        for n in range(len(values) - 3):
            denom = values[n + 1] * values[n + 2]
            if denom != 0:
                k = (values[n] + values[n + 3]) / denom
                break
        if k is None:
            return None
        for n in range(len(values) - 3):
            if values[n] + values[n + 3] != k * values[n + 1] * values[n + 2]:
                return None
        return LinearRelation("bilinear", (k,))
    raise ValueError(f"unknown relation shape {shape!r}")


# --- Lax pair for the fourth-order bilinear map ------------------------

_LAX_VARIABLES = ("u1", "u2", "u3", "u4", "zeta", "xi", "alpha", "gamma")


@dataclass(frozen=True)
class LaxPair:
    """L and M matrices plus the shifted L with the recurrence eliminated."""

    L: tuple
    M: tuple
    L_shifted: tuple
    variables: tuple
    alpha: RationalExpression
    gamma: RationalExpression


def _lax_stream(u_values, alpha, gamma):
    """u_1..u_6 with u_5, u_6 eliminated through the recurrence."""
    names = _LAX_VARIABLES

    def const(v):
        return RationalExpression.constant(names, Fraction(v))

    def var(name):
        return RationalExpression.variable(names, name)

    if u_values is None:
        u = [var(f"u{i}") for i in range(1, 5)]
    else:
        if len(u_values) != 4:
            raise ValueError("need a window of 4 values")
        u = [const(v) for v in u_values]
    a = const(alpha) if alpha is not None else var("alpha")
    g = const(gamma) if gamma is not None else var("gamma")
    for _ in range(2):
        u1, u2, u3, u4 = u[-4], u[-3], u[-2], u[-1]
        nxt = (a * u2 * u3**2 * u4 + g) / (u1 * u2**2 * u3**3 * u4**2)
        u.append(nxt)
    return u, a, g, var("zeta"), const(1)


def _lax_matrices(u, a, zeta, one, offset):
    """(L_offset, M_offset) from the eliminated stream, 0-based offset."""

    def x_coord(i):
        return one / (u[i + 1] * u[i + 2])

    def y_coord(i):
        return u[i] * u[i + 1] * u[i + 2]

    zero = one - one
    m = (
        (zero, one, zero),
        (zero, zero, one),
        (zeta, x_coord(offset), zero),
    )
    o = offset
    l_rows = (
        (zeta * y_coord(o), u[o], zeta * a),
        (zeta**2 * a, zeta * (y_coord(o + 1) + a * x_coord(o)), u[o + 1]),
        (
            zeta * u[o + 2],
            zeta**2 * a + one / u[o + 1],
            zeta * (y_coord(o + 2) + a * x_coord(o + 1)),
        ),
    )
    return l_rows, m


def somos6_lax_pair(u_values=None, alpha=None, gamma=None, *, perturb=False):
    """The 3x3 Lax pair of the fourth-order bilinear map.

    ``u_values`` numeric (4-window) or None for symbolic u1..u4; ``alpha``
    and ``gamma`` numeric or None for symbols.  ``perturb`` replaces gamma
    by gamma+1 in the shifted matrix only, breaking the Lax identity — a
    negative control for the checker.
    """
    u, a, g, zeta, one = _lax_stream(u_values, alpha, gamma)
    l_now, m_now = _lax_matrices(u, a, zeta, one, 0)
    if perturb:
        u_p, a_p, g_p, zeta_p, one_p = _lax_stream(u_values, alpha, gamma)
        g_broken = g_p + one_p
        stream = list(u_p[:4])
        for _ in range(2):
            u1, u2, u3, u4 = stream[-4], stream[-3], stream[-2], stream[-1]
            stream.append(
                (a_p * u2 * u3**2 * u4 + g_broken)
                / (u1 * u2**2 * u3**3 * u4**2)
            )
        l_next, _ = _lax_matrices(stream, a_p, zeta_p, one_p, 1)
    else:
        l_next, _ = _lax_matrices(u, a, zeta, one, 1)
    return LaxPair(
        L=l_now,
        M=m_now,
        L_shifted=l_next,
        variables=_LAX_VARIABLES,
        alpha=a,
        gamma=g,
    )


def _matrix_product(a, b):
    size = len(a)
    return tuple(
        tuple(
            sum((a[i][k] * b[k][j] for k in range(size)), start=a[i][0] * 0)
            for j in range(size)
        )
        for i in range(size)
    )


def lax_check(pair=None, *, u_values=None, alpha=None, gamma=None,
              perturb=False, rounds=6, seed=0):
    """Entrywise identity test of the discrete Lax equation L' M = M L."""
    if pair is None:
        pair = somos6_lax_pair(
            u_values, alpha, gamma, perturb=perturb
        )
    lhs = _matrix_product(pair.L_shifted, pair.M)
    rhs = _matrix_product(pair.M, pair.L)
    for i in range(3):
        for j in range(3):
            outcome = identity_test(
                lhs[i][j], rhs[i][j], rounds=rounds, seed=seed + 10 * i + j
            )
            if not outcome.equal:
                return False
    return True


@dataclass(frozen=True)
class SpectralCurve:
    """det(L - xi*I) collected by (xi, zeta) exponents, with H1, H2 read off."""

    coefficients: dict  # {(xi_deg, zeta_deg): RationalExpression}
    h1: RationalExpression
    h2: RationalExpression

    def coefficient(self, xi_deg, zeta_deg):
        return self.coefficients.get((xi_deg, zeta_deg))


def collect_by_exponents(expression, names):
    """Group a rational expression by exponents of the given variables.

    The denominator must not involve them; returns {exponents: coefficient}
    with the named exponents zeroed out inside each coefficient.
    """
    variables = expression.numerator.variables
    indices = [variables.index(name) for name in names]
    for exps in expression.denominator.terms:
        if any(exps[i] for i in indices):
            raise ValueError(
                f"denominator involves {names}; cannot collect"
            )
    groups = {}
    for exps, coeff in expression.numerator.terms.items():
        key = tuple(exps[i] for i in indices)
        stripped = list(exps)
        for i in indices:
            stripped[i] = 0
        groups.setdefault(key, {})[tuple(stripped)] = coeff
    return {
        key: RationalExpression(
            LaurentPolynomial(variables, terms), expression.denominator
        )
        for key, terms in groups.items()
    }


_CURVE_SUPPORT = {(3, 0), (2, 1), (1, 0), (1, 2), (0, 5), (0, 3)}


def spectral_curve(pair):
    """Characteristic polynomial of L, verified against the curve shape.

    The curve is -xi^3 + zeta*H1*xi^2 + (1 - H2*zeta^2)*xi + alpha^3*zeta^5
    + gamma*zeta^3; H1 and H2 are extracted from their coefficients.
    ShapeMismatch is raised when any coefficient lies outside this support
    or the two constant slots differ from -1 and 1.
    """
    names = pair.variables
    xi = RationalExpression.variable(names, "xi")
    a = [[pair.L[i][j] for j in range(3)] for i in range(3)]
    for i in range(3):
        a[i][i] = a[i][i] - xi
    det = (
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    )
    groups = collect_by_exponents(det, ("xi", "zeta"))
    one = RationalExpression.constant(names, 1)
    cleaned = {}
    for key, coeff in groups.items():
        if coeff.numerator.is_zero():
            continue
        if key not in _CURVE_SUPPORT:
            raise ShapeMismatch(
                f"unexpected xi^{key[0]} zeta^{key[1]} term in the curve"
            )
        cleaned[key] = coeff
    top = cleaned.get((3, 0))
    linear = cleaned.get((1, 0))
    if top is None or not identity_test(top, one - one - one * 1 + (one - one) - top).equal:
        # top must be exactly -1
        if top is None or not identity_test(top, (one - one) - one).equal:
            raise ShapeMismatch("xi^3 coefficient is not -1")
    if linear is None or not identity_test(linear, one).equal:
        raise ShapeMismatch("xi*zeta^0 coefficient is not 1")
    alpha_cubed = cleaned.get((0, 5))
    if alpha_cubed is not None:
        if not identity_test(alpha_cubed, pair.alpha**3).equal:
            raise ShapeMismatch("xi^0 zeta^5 coefficient is not alpha^3")
    gamma_slot = cleaned.get((0, 3))
    if gamma_slot is not None:
        if not identity_test(gamma_slot, pair.gamma).equal:
            raise ShapeMismatch("xi^0 zeta^3 coefficient is not gamma")
    zero = one - one
    h1 = cleaned.get((2, 1), zero)
    h2 = zero - cleaned.get((1, 2), zero)
    return SpectralCurve(coefficients=cleaned, h1=h1, h2=h2)


@dataclass(frozen=True)
class IntegrabilityVerdict:
    """Counts and verdict per the complete-integrability criterion."""

    dimension: int
    poisson_rank: int
    casimir_count: int
    involutive_count: int
    required_count: int
    verdict: str  # completely-integrable | not-established
    reasons: tuple = ()
    indeterminate: bool = False

    def to_json(self):
        return {
            "dimension": self.dimension,
            "poisson_rank": self.poisson_rank,
            "casimir_count": self.casimir_count,
            "involutive_count": self.involutive_count,
            "required_count": self.required_count,
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "indeterminate": self.indeterminate,
        }


def _jacobian_rank(functions, coordinates, extra_names, rng):
    """Rank of the gradient matrix at a random nonsingular rational point."""
    gradients = [
        [f.diff(name) for name in coordinates] for f in functions
    ]
    for _ in range(64):
        point = {name: Fraction(rng.randrange(2, 10**6)) for name in coordinates}
        for name in extra_names:
            point[name] = Fraction(rng.randrange(2, 10**6))
        try:
            matrix = [
                [g.eval_fraction(point) for g in row] for row in gradients
            ]
        except ZeroDivisionError:
            continue
        return rank(to_fraction_matrix(matrix))
    raise ArithmeticError("could not find a nonsingular evaluation point")


def integrability_report(structure, map_spec, integrals, *, points=3, seed=0):
    """Assemble the integrability verdict for a map with a chosen bracket.

    ``structure`` may be None (no invariant log-canonical bracket is known),
    which immediately yields "not-established".  Otherwise the Casimirs and
    the supplied integrals are checked for preservation, pairwise
    involutivity, and functional independence (Jacobian rank at several
    random points; disagreement across points flags the verdict
    indeterminate).  The verdict never claims non-integrability.
    """
    reasons = []
    if structure is None:
        return IntegrabilityVerdict(
            dimension=0,
            poisson_rank=0,
            casimir_count=0,
            involutive_count=0,
            required_count=0,
            verdict="not-established",
            reasons=("no invariant log-canonical bracket available",),
        )
    n = structure.n
    two_m = rank(to_fraction_matrix([list(r) for r in structure.rows]))
    m = two_m // 2
    required = n - m
    images, coordinates = map_images(map_spec)
    casimirs = casimir_monomials(structure, coordinates)
    if len(casimirs) != n - two_m:
        reasons.append("Casimir algebra is not maximal")
    preserved = []
    for idx, cas in enumerate(casimirs):
        if verify_first_integral(map_spec, cas, seed=seed + idx):
            preserved.append((f"casimir{idx + 1}", cas))
        else:
            reasons.append(
                f"Casimir {serialize_rational(cas)} is not preserved"
            )
    casimirs_ok = len(preserved) == len(casimirs)
    named = []
    for integral in integrals:
        if isinstance(integral, FirstIntegral):
            named.append((integral.name, integral.expression))
        else:
            named.append((f"integral{len(named) + 1}", integral))
    for idx, (name, expr) in enumerate(named):
        if verify_first_integral(map_spec, expr, seed=seed + 101 + idx):
            preserved.append((name, expr))
        else:
            reasons.append(f"{name} is not preserved by the map")
    involutive = True
    integral_exprs = [(name, e) for name, e in preserved]
    for i in range(len(integral_exprs)):
        for j in range(i + 1, len(integral_exprs)):
            ni, fi = integral_exprs[i]
            nj, fj = integral_exprs[j]
            br = poisson_bracket(fi, fj, structure, coordinates)
            if not identity_test(
                br,
                RationalExpression.constant(br.numerator.variables, 0),
                rounds=8,
                seed=seed + 57 * i + j,
            ).equal:
                involutive = False
                reasons.append(f"{{{ni}, {nj}}} is not zero")
    indeterminate = False
    independent = 0
    if preserved:
        functions = [e for _, e in preserved]
        extra = tuple(
            name
            for f in functions
            for name in f.numerator.variables
            if name not in coordinates
        )
        rng = random.Random(seed)
        ranks = [
            _jacobian_rank(functions, coordinates, extra, rng)
            for _ in range(max(points, 1))
        ]
        if len(set(ranks)) != 1:
            indeterminate = True
            reasons.append(
                f"Jacobian rank disagrees across sample points: {ranks}"
            )
        else:
            independent = ranks[0]
    verdict = "not-established"
    if (
        casimirs_ok
        and involutive
        and not indeterminate
        and independent >= required
    ):
        verdict = "completely-integrable"
    elif independent < required and not reasons:
        reasons.append(
            f"only {independent} independent involutive integrals found; "
            f"{required} required"
        )
    return IntegrabilityVerdict(
        dimension=n,
        poisson_rank=two_m,
        casimir_count=len(casimirs),
        involutive_count=independent,
        required_count=required,
        verdict=verdict,
        reasons=tuple(reasons),
        indeterminate=indeterminate,
    )
