"""Exact rational linear algebra on small dense matrices.

Matrices are lists of lists of Fractions (integer entries are accepted and
coerced).  Everything here is deterministic: reduced row echelon form uses
the first nonzero pivot in column order, nullspace bases are parametrized
by free columns in ascending order, and integer bases are normalized to be
primitive with positive first nonzero entry.  Also home to minimal linear
recurrence extraction (Hankel-style solve plus verification) and a bisection
root finder for the dominant real root of a characteristic polynomial, both
used by the tropical growth classifier.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

__all__ = [
    "to_fraction_matrix",
    "identity_matrix",
    "matmul",
    "mat_vec",
    "transpose",
    "rref",
    "rank",
    "nullspace",
    "integer_nullspace",
    "solve",
    "invert",
    "primitive_integer_vector",
    "minimal_linear_recurrence",
    "largest_real_root",
]


def to_fraction_matrix(rows):
    return [[Fraction(entry) for entry in row] for row in rows]


def identity_matrix(n):
    return [
        [Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)
    ]


def matmul(a, b):
    if a and b and len(a[0]) != len(b):
        raise ValueError(f"shape mismatch: {len(a[0])} columns vs {len(b)} rows")
    return [
        [sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in zip(*b)]
        for row in a
    ]


def mat_vec(a, v):
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def rref(rows):
    """Reduced row echelon form; returns (matrix, pivot_columns)."""
    mat = to_fraction_matrix(rows)
    if not mat:
        return mat, []
    n_rows, n_cols = len(mat), len(mat[0])
    pivots = []
    row = 0
    for col in range(n_cols):
        pivot_row = next(
            (r for r in range(row, n_rows) if mat[r][col] != 0), None
        )
        if pivot_row is None:
            continue
        mat[row], mat[pivot_row] = mat[pivot_row], mat[row]
        scale = mat[row][col]
        mat[row] = [entry / scale for entry in mat[row]]
        for r in range(n_rows):
            if r != row and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [a - factor * b for a, b in zip(mat[r], mat[row])]
        pivots.append(col)
        row += 1
        if row == n_rows:
            break
    return mat, pivots


def rank(rows):
    return len(rref(rows)[1])


def nullspace(rows):
    """Basis of the rational right nullspace, one vector per free column."""
    mat, pivots = rref(rows)
    if not mat:
        return []
    n_cols = len(mat[0])
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n_cols
        vec[f] = Fraction(1)
        for row_idx, p in enumerate(pivots):
            vec[p] = -mat[row_idx][f]
        basis.append(vec)
    return basis


def primitive_integer_vector(vec):
    """Scale a rational vector to a primitive integer vector, first nonzero > 0."""
    denominators = [Fraction(x).denominator for x in vec]
    scale = 1
    for d in denominators:
        scale = scale * d // gcd(scale, d)
    ints = [int(Fraction(x) * scale) for x in vec]
    content = 0
    for value in ints:
        content = gcd(content, value)
    if content > 1:
        ints = [value // content for value in ints]
    lead = next((value for value in ints if value), 0)
    if lead < 0:
        ints = [-value for value in ints]
    return ints


def integer_nullspace(rows):
    """Primitive integer basis of the right nullspace, deterministic order."""
    return [primitive_integer_vector(vec) for vec in nullspace(rows)]


def solve(a, b):
    """One exact solution of ``a x = b``, or None when inconsistent."""
    mat = to_fraction_matrix(a)
    rhs = [Fraction(x) for x in b]
    if len(mat) != len(rhs):
        raise ValueError("right-hand side length does not match row count")
    n_cols = len(mat[0]) if mat else 0
    augmented = [row + [value] for row, value in zip(mat, rhs)]
    reduced, pivots = rref(augmented)
    if n_cols in pivots:
        return None
    solution = [Fraction(0)] * n_cols
    for row_idx, p in enumerate(pivots):
        solution[p] = reduced[row_idx][n_cols]
    return solution


def invert(rows):
    """Exact inverse of a square matrix; raises ValueError if singular."""
    mat = to_fraction_matrix(rows)
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise ValueError("matrix is not square")
    augmented = [row + ident_row for row, ident_row in zip(mat, identity_matrix(n))]
    reduced, pivots = rref(augmented)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in reduced]


def minimal_linear_recurrence(sequence, max_order=16):
    """Smallest-order linear recurrence satisfied by the whole sequence.

    Returns the coefficient tuple ``(c1, ..., cr)`` of
    ``s[n+r] = c1*s[n+r-1] + ... + cr*s[n]`` valid for every window of the
    input, or None.  Needs at least ``2r + 1`` entries to accept order r,
    so short sequences cannot vacuously satisfy high orders.
    """
    seq = [Fraction(x) for x in sequence]
    for order in range(1, max_order + 1):
        if len(seq) < 2 * order + 1:
            return None
        rows = []
        rhs = []
        for n in range(len(seq) - order):
            rows.append([seq[n + order - i] for i in range(1, order + 1)])
            rhs.append(seq[n + order])
        coeffs = solve(rows, rhs)
        if coeffs is None:
            continue
        if all(
            sum(c * seq[n + order - i] for i, c in enumerate(coeffs, start=1))
            == seq[n + order]
            for n in range(len(seq) - order)
        ):
            return tuple(coeffs)
    return None


def largest_real_root(recurrence_coeffs, tolerance=1e-12):
    """Dominant real root of ``t^r - c1*t^(r-1) - ... - cr`` above 1.

    Scans a descending grid from the Cauchy bound and bisects the rightmost
    sign change.  Returns None when no real root exceeds ``1 + tolerance``.
    """
    coeffs = [float(c) for c in recurrence_coeffs]

    def poly(t):
        value = 1.0
        for c in coeffs:
            value = value * t - c
        return value

    upper = 1.0 + sum(abs(c) for c in coeffs)
    grid = 4096
    prev_t = upper
    prev_v = poly(upper)
    lo = hi = None
    for k in range(1, grid + 1):
        t = upper + (1.0 - upper) * k / grid
        v = poly(t)
        if v == 0.0:
            lo = hi = t
            break
        if (v < 0) != (prev_v < 0):
            lo, hi = t, prev_t
            break
        prev_t, prev_v = t, v
    if lo is None:
        return None
    while hi - lo > tolerance:
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break
        if (poly(mid) < 0) == (poly(lo) < 0):
            lo = mid
        else:
            hi = mid
    root = (lo + hi) / 2
    if root <= 1.0 + tolerance:
        return None
    return root
