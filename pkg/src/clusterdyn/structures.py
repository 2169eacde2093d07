"""Log-canonical Poisson brackets, presymplectic reduction, and U-systems.

A log-canonical bracket ``{x_i, x_j} = p_ij x_i x_j`` is compatible with an
exchange matrix when the once-mutated coordinates are again log-canonical in
every direction; the constraints come from differentiating the exchange
relation symbolically and matching monomial coefficients.  A two-form
``omega = sum b_ij/(x_i x_j) dx_i ^ dx_j`` built from a degenerate exchange
matrix descends to the monomial coordinates ``u_j = x^{v_j}`` indexed by a
palindromic basis of ``im B``; the recurrence then collapses to a shorter
U-system in those coordinates, derived here by exact integer-lattice
elimination and certified by an identity test against direct substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import log2

from .identity import identity_test
from .laurent import (
    LaurentPolynomial,
    RationalExpression,
    substitute,
)
from .linalg import (
    integer_nullspace,
    invert,
    matmul,
    nullspace,
    primitive_integer_vector,
    rank,
    solve,
    to_fraction_matrix,
    transpose,
)
from .periodicity import RecurrenceSpec, detect_period

__all__ = [
    "PoissonStructure",
    "PoissonMapResult",
    "BracketSpace",
    "ReductionData",
    "USystemSpec",
    "PresymplecticForm",
    "NoPalindromicBasis",
    "EliminationFailed",
    "kernel_basis",
    "poisson_bracket",
    "casimir_monomials",
    "shift_map_images",
    "usystem_map_images",
    "check_poisson_map",
    "find_log_canonical_bracket",
    "palindromic_basis",
    "reduce_to_usystem",
    "reduced_form_matrix",
    "presymplectic_form",
    "build_structure_bundle",
]


class NoPalindromicBasis(ValueError):
    """No palindromic vector spans the image lattice of the matrix."""


class EliminationFailed(ValueError):
    """The recurrence does not close in the reduced monomial coordinates."""


def _matrix_rows(matrix):
    """Accept an ExchangeMatrix-like object or a plain list of rows."""
    if hasattr(matrix, "to_list"):
        return matrix.to_list()
    return [list(row) for row in matrix]


@dataclass(frozen=True)
class PoissonStructure:
    """Log-canonical bracket data: {x_i, x_j} = p_ij x_i x_j."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(Fraction(v) for v in row) for row in self.rows)
        n = len(rows)
        for row in rows:
            if len(row) != n:
                raise ValueError("Poisson matrix must be square")
        for i in range(n):
            for j in range(n):
                if rows[i][j] != -rows[j][i]:
                    raise ValueError("Poisson matrix must be skew-symmetric")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self):
        return len(self.rows)

    def entry(self, i, j):
        """Coefficient p_ij, 1-based."""
        return self.rows[i - 1][j - 1]

    def scaled(self, factor):
        factor = Fraction(factor)
        return PoissonStructure(
            tuple(tuple(v * factor for v in row) for row in self.rows)
        )

    def to_list(self):
        return [
            [int(v) if v.denominator == 1 else v for v in row]
            for row in self.rows
        ]


def kernel_basis(matrix):
    """Primitive integer basis of the rational kernel, deterministic order.

    When the kernel is spanned by the shifts of a single short (banded)
    vector — the shape translation-covariant structures produce — that
    basis is returned, so kernel monomials inherit the shift symmetry;
    otherwise the echelon basis of the rational nullspace is used.
    """
    rows = _matrix_rows(matrix)
    generic = [tuple(v) for v in integer_nullspace(rows)]
    n = len(rows)
    k = len(generic)
    if k == 0:
        return generic
    length = n - k + 1
    constraints = []
    for shift in range(k):
        for row in rows:
            constraints.append(
                [Fraction(row[shift + i]) for i in range(length)]
            )
    solutions = nullspace(constraints)
    if len(solutions) != 1:
        return generic
    core = primitive_integer_vector(solutions[0])
    lead = next((v for v in core if v != 0), 0)
    if lead < 0:
        core = [-v for v in core]
    banded = []
    for shift in range(k):
        vec = [0] * n
        for i, v in enumerate(core):
            vec[shift + i] = v
        banded.append(tuple(vec))
    return banded


def poisson_bracket(f, g, structure, coordinates):
    """{f, g} under a log-canonical structure on the named coordinates.

    Expression variables beyond ``coordinates`` (frozen multipliers) are
    treated as constants.
    """
    if isinstance(f, LaurentPolynomial):
        f = RationalExpression.from_polynomial(f)
    if isinstance(g, LaurentPolynomial):
        g = RationalExpression.from_polynomial(g)
    coordinates = tuple(coordinates)
    if len(coordinates) != structure.n:
        raise ValueError("coordinate count must match the Poisson matrix")
    partial_f = {}
    partial_g = {}
    result = None
    for a in range(structure.n):
        for b in range(a + 1, structure.n):
            p = structure.entry(a + 1, b + 1)
            if p == 0:
                continue
            name_a, name_b = coordinates[a], coordinates[b]
            if name_a not in partial_f:
                partial_f[name_a] = f.diff(name_a)
                partial_g[name_a] = g.diff(name_a)
            if name_b not in partial_f:
                partial_f[name_b] = f.diff(name_b)
                partial_g[name_b] = g.diff(name_b)
            wedge = (
                partial_f[name_a] * partial_g[name_b]
                - partial_f[name_b] * partial_g[name_a]
            )
            if wedge.numerator.is_zero():
                continue
            variables = wedge.numerator.variables
            xa = RationalExpression.variable(variables, name_a)
            xb = RationalExpression.variable(variables, name_b)
            term = xa * xb * wedge * RationalExpression.constant(variables, p)
            result = term if result is None else result + term
    if result is None:
        zero = LaurentPolynomial.zero(f.numerator.variables)
        return RationalExpression.from_polynomial(zero)
    return result


def _monomial_expression(exponents, variables, extra_names=()):
    """x^w as a RationalExpression over variables (plus extras)."""
    names = tuple(variables) + tuple(extra_names)
    result = RationalExpression.constant(names, 1)
    for name, e in zip(variables, exponents):
        if e:
            result = result * RationalExpression.variable(names, name) ** int(e)
    return result


def casimir_monomials(structure, variables=None):
    """x^w for each kernel vector w, each certified to centralize the bracket."""
    rows = structure.rows
    n = structure.n
    if variables is None:
        variables = tuple(f"x{i}" for i in range(1, n + 1))
    monomials = []
    for w in kernel_basis(rows):
        cas = _monomial_expression(w, variables)
        for i, name in enumerate(variables):
            coord = RationalExpression.variable(variables, name)
            br = poisson_bracket(cas, coord, structure, variables)
            if not br.numerator.is_zero():
                raise AssertionError(
                    f"kernel vector {w} does not give a Casimir at x{i+1}"
                )
        monomials.append(cas)
    return monomials


def shift_map_images(spec, variables=None):
    """Images of the shift map of a recurrence: x_i -> x_{i+1}, x_N -> step.

    Multiplier names ride along as extra (constant) variables in the images.
    """
    n = spec.order
    if variables is None:
        variables = tuple(f"x{i}" for i in range(1, n + 1))
    names = tuple(variables) + spec.multiplier_names()
    images = [
        RationalExpression.variable(names, variables[i]) for i in range(1, n)
    ]
    numerator = LaurentPolynomial.zero(names)
    for monomial, multiplier_slot in ((spec.plus, 0), (spec.minus, 1)):
        exponents = {name: 0 for name in names}
        for offset, exp in monomial:
            exponents[variables[offset]] += exp
        for mult_name, p_exp, m_exp in spec.multipliers:
            exponents[mult_name] += (p_exp, m_exp)[multiplier_slot]
        numerator = numerator + LaurentPolynomial.monomial(
            names, tuple(exponents[v] for v in names), 1
        )
    last = RationalExpression.from_polynomial(numerator) / (
        RationalExpression.variable(names, variables[0])
    )
    images.append(last)
    return tuple(images)


def usystem_map_images(usys, variables=None):
    """Images of the reduced shift map: u_i -> u_{i+1}, u_2m -> F/u_1."""
    n = usys.order
    if variables is None:
        variables = tuple(f"u{i}" for i in range(1, n + 1))
    names = tuple(variables) + tuple(usys.multipliers)
    images = [
        RationalExpression.variable(names, variables[i]) for i in range(1, n)
    ]
    assignments = {
        usys.window[j]: RationalExpression.variable(names, variables[j + 1])
        for j in range(n - 1)
    }
    for name in usys.multipliers:
        assignments[name] = RationalExpression.variable(names, name)
    rhs = substitute(usys.rhs, assignments, names)
    images.append(rhs / RationalExpression.variable(names, variables[0]))
    return tuple(images)


@dataclass(frozen=True)
class PoissonMapResult:
    """Outcome of a Poisson-map check with its aggregate error bound."""

    ok: bool
    log2_error_bound: float | None  # None = fully exact
    failing_pairs: tuple = ()

    def __bool__(self):
        return self.ok


def check_poisson_map(images, structure, coordinates, *, rounds=8, seed=0):
    """Whether the map preserves the bracket: {f_i, f_j} = p_ij f_i f_j.

    Every pair is checked by an exact or probabilistic identity test; the
    reported bound is the combined probability that any failed pair went
    unnoticed (None when every pair was decided exactly).
    """
    images = tuple(images)
    coordinates = tuple(coordinates)
    if len(images) != structure.n or len(coordinates) != structure.n:
        raise ValueError("map arity must match the Poisson matrix")
    failing = []
    bounds = []
    for i in range(structure.n):
        for j in range(i + 1, structure.n):
            lhs = poisson_bracket(
                images[i], images[j], structure, coordinates
            )
            p = structure.entry(i + 1, j + 1)
            rhs = (
                images[i]
                * images[j]
                * RationalExpression.constant(images[i].numerator.variables, p)
            )
            outcome = identity_test(lhs, rhs, rounds=rounds, seed=seed + i * 131 + j)
            if not outcome.equal:
                failing.append((i + 1, j + 1))
            elif outcome.log2_error_bound is not None:
                bounds.append(outcome.log2_error_bound)
    combined = None
    if bounds:
        peak = max(bounds)
        combined = peak + log2(sum(2 ** (b - peak) for b in bounds))
    return PoissonMapResult(not failing, combined, tuple(failing))


@dataclass(frozen=True)
class BracketSpace:
    """Linear space of compatible log-canonical brackets (possibly empty)."""

    n: int
    basis: tuple  # tuple of integer skew matrices (tuple of tuple rows)

    @property
    def dimension(self):
        return len(self.basis)

    @property
    def is_empty(self):
        return not self.basis

    def contains(self, structure):
        """Exact membership test for a PoissonStructure or matrix."""
        rows = (
            structure.rows
            if isinstance(structure, PoissonStructure)
            else _matrix_rows(structure)
        )
        pairs = [(a, b) for a in range(self.n) for b in range(a + 1, self.n)]
        columns = [
            [Fraction(mat[a][b]) for mat in self.basis] for a, b in pairs
        ]
        target = [Fraction(rows[a][b]) for a, b in pairs]
        if not self.basis:
            return all(v == 0 for v in target)
        return solve(columns, target) is not None


def find_log_canonical_bracket(matrix, *, cross_check=True):
    """All log-canonical brackets staying log-canonical after one mutation.

    The entries of P are unknowns.  For each direction k the mutated
    coordinate is differentiated symbolically; requiring every ratio
    {x_i, x'_k}/(x_i x'_k) to be constant matches coefficients across the
    monomials of the exchange numerator and yields linear constraints on P.
    The returned space is the exact rational solution set (a basis of skew
    matrices; empty tuple when only the zero bracket survives).
    """
    rows = _matrix_rows(matrix)
    n = len(rows)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    index = {pair: t for t, pair in enumerate(pairs)}

    def entry_coeff(i, b):
        """(unknown index, sign) for p_{i b}, 0-based i != b."""
        if i < b:
            return index[(i, b)], 1
        return index[(b, i)], -1

    variables = tuple(f"x{i}" for i in range(1, n + 1))
    constraints = []
    for k in range(n):
        exchange = LaurentPolynomial.zero(variables)
        for sign in (1, -1):
            exponents = tuple(max(sign * rows[k][b], 0) for b in range(n))
            exchange = exchange + LaurentPolynomial.monomial(
                variables, exponents, 1
            )
        terms = sorted(exchange.terms)
        if len(terms) < 2:
            continue
        base = terms[0]
        for other in terms[1:]:
            # constancy of sum_b p_ib * x_b d_b(S)/S across monomials of S
            for i in range(n):
                if i == k:
                    continue
                row = [Fraction(0)] * len(pairs)
                for b in range(n):
                    if b == i:
                        continue
                    delta = other[b] - base[b]
                    if delta:
                        t, sign = entry_coeff(i, b)
                        row[t] += sign * delta
                if any(row):
                    constraints.append(row)
    if constraints:
        solution_vectors = nullspace(constraints)
    else:
        solution_vectors = [
            [Fraction(1 if t == s else 0) for t in range(len(pairs))]
            for s in range(len(pairs))
        ]
    basis = []
    for vec in solution_vectors:
        vec = primitive_integer_vector(vec)
        mat = [[0] * n for _ in range(n)]
        for (a, b), t in index.items():
            mat[a][b] = vec[t]
            mat[b][a] = -vec[t]
        basis.append(tuple(tuple(r) for r in mat))
    space = BracketSpace(n, tuple(basis))
    if cross_check and basis:
        _cross_check_bracket(rows, space, variables)
    return space


def _cross_check_bracket(rows, space, variables):
    """Probabilistic re-check: each basis bracket stays log-canonical."""
    n = len(rows)
    for mat in space.basis:
        structure = PoissonStructure(mat)
        for k in range(n):
            exchange = LaurentPolynomial.zero(variables)
            for sign in (1, -1):
                exponents = tuple(max(sign * rows[k][b], 0) for b in range(n))
                exchange = exchange + LaurentPolynomial.monomial(
                    variables, exponents, 1
                )
            mutated = RationalExpression.from_polynomial(
                exchange
            ) / RationalExpression.variable(variables, variables[k])
            for i in range(n):
                if i == k:
                    continue
                coord = RationalExpression.variable(variables, variables[i])
                br = poisson_bracket(coord, mutated, structure, variables)
                ratio = br / (coord * mutated)
                ones = {name: Fraction(1) for name in variables}
                value = ratio.eval_fraction(ones)
                check = identity_test(
                    ratio,
                    RationalExpression.constant(variables, value),
                    rounds=2,
                    seed=17 * k + i,
                )
                if not check.equal:
                    raise AssertionError(
                        "compatibility solve produced a non-constant ratio"
                    )


@dataclass(frozen=True)
class ReductionData:
    """Palindromic basis of im B and the monomial coordinates it defines."""

    n: int
    rank: int  # 2m
    palindrome: tuple
    vectors: tuple  # 2m shifted copies of the palindrome, length n each
    kernel: tuple  # primitive integer basis of ker B

    def monomials(self, variables=None, extra_names=()):
        """u_j = x^{v_j} as RationalExpressions."""
        if variables is None:
            variables = tuple(f"x{i}" for i in range(1, self.n + 1))
        return tuple(
            _monomial_expression(v, variables, extra_names)
            for v in self.vectors
        )

    def to_json(self):
        return {
            "n": self.n,
            "rank": self.rank,
            "palindrome": list(self.palindrome),
            "vectors": [list(v) for v in self.vectors],
            "kernel": [list(w) for w in self.kernel],
        }


def palindromic_basis(matrix):
    """ReductionData for a period-1 exchange matrix.

    The basis consists of one palindromic integer vector of length
    N - rank + 1, padded with zeros, and its shifts; it is found by solving
    for a palindrome orthogonal to ker B (im B is the rational orthogonal
    complement of the kernel for skew-symmetric B), normalized primitive
    with positive leading entry.
    """
    rows = _matrix_rows(matrix)
    n = len(rows)
    if detect_period(rows, max_period=1) != 1:
        raise ValueError("palindromic basis needs a period-1 exchange matrix")
    two_m = rank(to_fraction_matrix(rows))
    if two_m == 0:
        raise NoPalindromicBasis("zero matrix has no reduced coordinates")
    length = n - two_m + 1
    kernel = kernel_basis(rows)
    free = (length + 1) // 2

    def palindrome_from_free(values):
        core = list(values) + list(reversed(values[: length // 2]))
        return core

    constraint_rows = []
    for shift in range(two_m):
        for w in kernel:
            row = [Fraction(0)] * free
            for i in range(length):
                f = min(i, length - 1 - i)
                row[f] += Fraction(w[shift + i])
            constraint_rows.append(row)
    if constraint_rows:
        solutions = nullspace(constraint_rows)
    else:
        solutions = [
            [Fraction(1 if t == s else 0) for t in range(free)]
            for s in range(free)
        ]
    if not solutions:
        raise NoPalindromicBasis(
            "no palindromic vector is orthogonal to the kernel"
        )
    core = palindrome_from_free(primitive_integer_vector(solutions[0]))
    nonzero = next((v for v in core if v != 0), 0)
    if nonzero < 0:
        core = [-v for v in core]
    vectors = []
    for shift in range(two_m):
        vec = [0] * n
        for i, v in enumerate(core):
            vec[shift + i] = v
        vectors.append(tuple(vec))
    return ReductionData(
        n=n,
        rank=two_m,
        palindrome=tuple(core),
        vectors=tuple(vectors),
        kernel=tuple(tuple(w) for w in kernel),
    )


@dataclass(frozen=True)
class USystemSpec:
    """Reduced recurrence u_n u_{n+2m} = F(u_{n+1}, ..., u_{n+2m-1}).

    ``rhs`` is a RationalExpression in the window names ``u1..u{2m-1}``
    (uj standing for u_{n+j}) plus any frozen multiplier names.  A
    nonautonomous multiplier stream may supply per-step multiplier values.
    """

    order: int  # 2m
    rhs: RationalExpression
    multipliers: tuple = ()
    stream: object = field(default=None, compare=False)

    @property
    def window(self):
        return tuple(f"u{j}" for j in range(1, self.order))

    def step_values(self, window_values, params=None, n=None):
        """Next value u_{n+2m} from (u_n, ..., u_{n+2m-1})."""
        if len(window_values) != self.order:
            raise ValueError(f"window must have {self.order} values")
        assignment = {
            name: Fraction(window_values[j + 1])
            for j, name in enumerate(self.window)
        }
        values = dict(params or {})
        if self.stream is not None and n is not None:
            values.update(self.stream(n))
        for name in self.multipliers:
            if name not in values:
                raise ValueError(f"missing multiplier value for {name!r}")
            assignment[name] = Fraction(values[name])
        return self.rhs.eval_fraction(assignment) / Fraction(window_values[0])

    def iterate(self, inits, steps, params=None):
        values = [Fraction(v) for v in inits]
        if len(values) != self.order:
            raise ValueError(f"need {self.order} initial values")
        for n in range(steps):
            values.append(
                self.step_values(values[n : n + self.order], params, n=n + 1)
            )
        return values

    def to_json(self):
        from .laurent import serialize_rational

        return {
            "order": self.order,
            "rhs": serialize_rational(self.rhs),
            "window": list(self.window),
            "multipliers": list(self.multipliers),
        }


def _solve_integer_combination(vectors, target):
    """Integer coefficients expressing target in the given vectors, or None."""
    columns = [
        [Fraction(v[i]) for v in vectors] for i in range(len(target))
    ]
    solution = solve(columns, [Fraction(t) for t in target])
    if solution is None:
        return None
    if any(c.denominator != 1 for c in solution):
        return None
    return [int(c) for c in solution]


def reduce_to_usystem(spec, reduction):
    """Collapse a recurrence to its U-system along a palindromic basis.

    u_1 u_{2m+1} is a monomial in x_1..x_{N+1}; eliminating x_{N+1} through
    the exchange relation and solving two integer lattice systems expresses
    the product as ``u^c (A u^r + G)^{p}`` in the interior coordinates.
    The result is certified by an exact identity test against direct
    substitution of the monomials into one symbolic step.
    """
    n = spec.order
    if reduction.n != n:
        raise ValueError("reduction data does not match the recurrence order")
    two_m = reduction.rank
    core = reduction.palindrome
    p_lead = core[0]
    if p_lead <= 0:
        raise EliminationFailed("palindrome must have positive leading entry")
    m_plus = [0] * n
    for offset, exp in spec.plus:
        m_plus[offset] += exp
    m_minus = [0] * n
    for offset, exp in spec.minus:
        m_minus[offset] += exp
    # v_{2m+1} is the palindrome shifted by 2m; exactly one slot (x_{N+1},
    # exponent p_lead by palindromy) sticks out past the window.
    truncated = [0] * n
    for i, v in enumerate(core[:-1]):
        truncated[two_m + i] = v
    v1 = reduction.vectors[0]
    w0 = [v1[i] + truncated[i] - (p_lead if i == 0 else 0) for i in range(n)]
    interior = reduction.vectors[1:]
    r = _solve_integer_combination(
        interior, [m_plus[i] - m_minus[i] for i in range(n)]
    )
    if r is None:
        raise EliminationFailed(
            "exchange monomial ratio is not a monomial in the interior u's"
        )
    c = _solve_integer_combination(
        interior, [w0[i] + p_lead * m_minus[i] for i in range(n)]
    )
    if c is None:
        raise EliminationFailed(
            "boundary monomial is not a monomial in the interior u's"
        )
    window = tuple(f"u{j}" for j in range(1, two_m))
    mult_names = spec.multiplier_names()
    names = window + mult_names
    plus_mult = {name: p for name, p, _ in spec.multipliers}
    minus_mult = {name: m for name, _, m in spec.multipliers}
    a_mono = LaurentPolynomial.monomial(
        names,
        tuple([r[j] for j in range(two_m - 1)])
        + tuple(plus_mult[name] for name in mult_names),
        1,
    )
    g_mono = LaurentPolynomial.monomial(
        names,
        (0,) * (two_m - 1) + tuple(minus_mult[name] for name in mult_names),
        1,
    )
    inner = RationalExpression.from_polynomial(a_mono + g_mono)
    u_c = _monomial_expression(c, window, mult_names)
    rhs = u_c * inner**p_lead
    usys = USystemSpec(order=two_m, rhs=rhs, multipliers=mult_names)
    _verify_usystem(spec, reduction, usys)
    return usys


def _verify_usystem(spec, reduction, usys):
    """Exact check: u_1 u_{2m+1} computed through x equals F(u_2..u_{2m})."""
    from .periodicity import iterate_symbolic

    values = iterate_symbolic(spec, 1)
    as_rational = [RationalExpression.from_polynomial(v) for v in values]
    n = spec.order
    two_m = reduction.rank
    core = reduction.palindrome

    def u_at(start):
        result = None
        for i, e in enumerate(core):
            if not e:
                continue
            factor = as_rational[start + i] ** int(e)
            result = factor if result is None else result * factor
        return result

    lhs = u_at(0) * u_at(two_m)
    assignments = {
        usys.window[j]: u_at(j + 1) for j in range(two_m - 1)
    }
    var_names = values[0].variables
    for name in usys.multipliers:
        assignments[name] = RationalExpression.variable(var_names, name)
    rhs = substitute(usys.rhs, assignments, var_names)
    outcome = identity_test(lhs, rhs)
    if not outcome.equal:
        raise EliminationFailed(
            "derived U-system failed the substitution identity"
        )


@dataclass(frozen=True)
class PresymplecticForm:
    """Coefficient matrix of omega and its reduced matrix on u-coordinates."""

    matrix: tuple  # exchange coefficient rows
    reduced: tuple  # B-hat rows (rank x rank)
    basis: ReductionData

    def to_json(self):
        return {
            "matrix": [list(r) for r in self.matrix],
            "reduced": [
                [int(v) if Fraction(v).denominator == 1 else str(v) for v in r]
                for r in self.reduced
            ],
            "basis": self.basis.to_json(),
        }


def reduced_form_matrix(matrix, reduction):
    """B-hat with B = V^T B-hat V along the palindromic basis rows V.

    Solved over the rationals via the Gram matrix of V and verified exactly;
    a failure to reproduce B means the basis does not span im B.
    """
    rows = to_fraction_matrix(_matrix_rows(matrix))
    v_rows = to_fraction_matrix([list(v) for v in reduction.vectors])
    gram = matmul(v_rows, transpose(v_rows))
    gram_inv = invert(gram)
    inner = matmul(matmul(v_rows, rows), transpose(v_rows))
    reduced = matmul(matmul(gram_inv, inner), gram_inv)
    back = matmul(matmul(transpose(v_rows), reduced), v_rows)
    if back != rows:
        raise ValueError(
            "exchange matrix does not reduce along the palindromic basis"
        )
    normalized = tuple(
        tuple(int(v) if v.denominator == 1 else v for v in row)
        for row in reduced
    )
    return normalized


def presymplectic_form(matrix, reduction=None):
    """The two-form of an exchange matrix together with its reduction."""
    rows = _matrix_rows(matrix)
    if reduction is None:
        reduction = palindromic_basis(rows)
    reduced = reduced_form_matrix(rows, reduction)
    return PresymplecticForm(
        matrix=tuple(tuple(r) for r in rows),
        reduced=reduced,
        basis=reduction,
    )


def build_structure_bundle(matrix, spec=None):
    """JSON-able summary: brackets, kernel, palindromic basis, U-system."""
    from .laurent import serialize_rational

    rows = _matrix_rows(matrix)
    bundle = {"matrix": [list(r) for r in rows]}
    space = find_log_canonical_bracket(rows)
    bundle["bracket_space"] = {
        "dimension": space.dimension,
        "basis": [[list(r) for r in mat] for mat in space.basis],
    }
    bundle["kernel"] = [list(w) for w in kernel_basis(rows)]
    verified = {}
    try:
        reduction = palindromic_basis(rows)
    except (ValueError, NoPalindromicBasis) as exc:
        bundle["palindromic_basis"] = None
        verified["reduction"] = f"unavailable: {exc}"
    else:
        bundle["palindromic_basis"] = reduction.to_json()
        try:
            form = presymplectic_form(rows, reduction)
        except ValueError as exc:
            verified["presymplectic"] = f"unavailable: {exc}"
        else:
            bundle["reduced_form"] = form.to_json()["reduced"]
            verified["presymplectic"] = "verified"
        if spec is not None:
            try:
                usys = reduce_to_usystem(spec, reduction)
            except EliminationFailed as exc:
                verified["usystem"] = f"unavailable: {exc}"
            else:
                bundle["usystem"] = usys.to_json()
                verified["usystem"] = "verified"
    bundle["verification"] = verified
    return bundle
