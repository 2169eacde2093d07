"""Exchange matrices, quivers, and seeds with exact mutation dynamics.

An exchange matrix is an integer skew-symmetrizable square matrix.  A seed
couples such a matrix with a cluster of rational expressions (and optionally
a tuple of coefficient variables evolving in the universal semifield).
Mutation in a direction k transforms all three layers:

* matrix: ``b'_ij = -b_ij`` if ``k in (i, j)``, else
  ``b_ij + sgn(b_ik) * max(b_ik * b_kj, 0)``;
* cluster (coefficient-free): ``x_k' = (prod x_i^[b_ki]+ + prod x_i^[-b_ki]+) / x_k``
  where ``[t]+ = max(t, 0)``, with optional frozen multipliers attached to
  the two exchange monomials;
* cluster (with coefficients): the plus monomial is weighted by ``y_k`` and
  the result divided by ``1 + y_k``; coefficients transform by
  ``y_k -> 1/y_k`` and ``y_j -> y_j (1 + y_k^{-sgn b_jk})^{-b_jk}``.

Mutation is an involution on all layers.  New cluster entries are validated
to be Laurent (monomial denominator) in the coefficient-free mode via exact
division, which is how the computation stays polynomial-sized; a failure
raises LaurentValidationError rather than silently keeping a fraction.

Directions and vertex labels are 1-based throughout the public interface,
matching the usual labelling of quiver vertices.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .laurent import (
    NonExactDivision,
    RationalExpression,
    exact_div,
    parse_rational,
    serialize_rational,
)

__all__ = [
    "ExchangeMatrix",
    "Quiver",
    "Seed",
    "MutationHistory",
    "LaurentValidationError",
    "skew_symmetrizer",
    "matrix_mutate",
    "apply_sequence",
    "rotation_permutation",
]


class LaurentValidationError(ArithmeticError):
    """A mutated cluster entry failed to reduce to a Laurent polynomial."""


def _validate_rows(rows):
    rows = tuple(tuple(int(entry) for entry in row) for row in rows)
    n = len(rows)
    for row in rows:
        if len(row) != n:
            raise ValueError(f"matrix is not square: row {row!r} in size-{n} matrix")
    for i in range(n):
        if rows[i][i] != 0:
            raise ValueError(f"diagonal entry ({i + 1},{i + 1}) is {rows[i][i]}, not 0")
    return rows


def skew_symmetrizer(rows):
    """Minimal positive integer diagonal D with D*B skew-symmetric, or None.

    None means no symmetrizer exists (it is a value, not an error): callers
    that require one, like ExchangeMatrix, turn it into a ValueError.
    """
    rows = _validate_rows(rows)
    n = len(rows)
    for i in range(n):
        for j in range(n):
            if (rows[i][j] == 0) != (rows[j][i] == 0):
                return None
            if rows[i][j] * rows[j][i] > 0:
                return None
    weights = [None] * n
    for start in range(n):
        if weights[start] is not None:
            continue
        weights[start] = Fraction(1)
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if rows[i][j] == 0:
                    continue
                required = weights[i] * Fraction(abs(rows[i][j]), abs(rows[j][i]))
                if weights[j] is None:
                    weights[j] = required
                    stack.append(j)
                elif weights[j] != required:
                    return None
    for i in range(n):
        for j in range(n):
            if weights[i] * rows[i][j] != -weights[j] * rows[j][i]:
                return None
    scale = 1
    for w in weights:
        scale = scale * w.denominator // _gcd(scale, w.denominator)
    diag = [int(w * scale) for w in weights]
    content = 0
    for d in diag:
        content = _gcd(content, d)
    if content > 1:
        diag = [d // content for d in diag]
    return tuple(diag)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def matrix_mutate(rows, k):
    """Matrix mutation in direction k (1-based)."""
    rows = tuple(tuple(row) for row in rows)
    n = len(rows)
    if not 1 <= k <= n:
        raise IndexError(f"mutation direction {k} out of range 1..{n}")
    kk = k - 1
    new = []
    for i in range(n):
        new_row = []
        for j in range(n):
            if i == kk or j == kk:
                new_row.append(-rows[i][j])
            else:
                b_ik = rows[i][kk]
                b_kj = rows[kk][j]
                sign = (b_ik > 0) - (b_ik < 0)
                new_row.append(rows[i][j] + sign * max(b_ik * b_kj, 0))
        new.append(tuple(new_row))
    return tuple(new)


class ExchangeMatrix:
    """Validated skew-symmetrizable integer matrix with mutation."""

    __slots__ = ("rows", "symmetrizer")

    def __init__(self, rows):
        rows = _validate_rows(rows)
        symmetrizer = skew_symmetrizer(rows)
        if symmetrizer is None:
            raise ValueError(
                "matrix is not skew-symmetrizable: no positive diagonal D "
                "makes D*B skew-symmetric"
            )
        self.rows = rows
        self.symmetrizer = symmetrizer

    @property
    def n(self):
        return len(self.rows)

    def is_skew_symmetric(self):
        return all(w == 1 for w in self.symmetrizer) and all(
            self.rows[i][j] == -self.rows[j][i]
            for i in range(self.n)
            for j in range(self.n)
        )

    def mutate(self, k):
        return ExchangeMatrix(matrix_mutate(self.rows, k))

    def relabel(self, permutation):
        """Entrywise relabel: ``new[i][j] = old[perm[i]][perm[j]]`` (1-based)."""
        perm = [p - 1 for p in permutation]
        if sorted(perm) != list(range(self.n)):
            raise ValueError(f"not a permutation of 1..{self.n}: {permutation!r}")
        return ExchangeMatrix(
            [[self.rows[perm[i]][perm[j]] for j in range(self.n)] for i in range(self.n)]
        )

    def to_list(self):
        return [list(row) for row in self.rows]

    def __eq__(self, other):
        if not isinstance(other, ExchangeMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"ExchangeMatrix({self.to_list()!r})"


def rotation_permutation(n, steps=1):
    """The 1-based permutation sending label i to i - steps (wrapping at 1).

    Composing mutations ``mu_m ... mu_1`` of a cluster mutation-periodic
    matrix reproduces the matrix relabelled by this permutation with
    ``steps = m``.
    """
    return tuple((i - 1 - steps) % n + 1 for i in range(1, n + 1))


class Quiver:
    """Directed multigraph form of a skew-symmetric exchange matrix.

    Arrows are stored as a dict ``(source, target) -> multiplicity`` with
    1-based vertices, no loops, and at most one direction per vertex pair.
    Mutation follows the three-step rule: compose paths through k, reverse
    arrows at k, cancel opposite pairs.  On skew-symmetric matrices this
    commutes with matrix mutation (tested, not assumed).
    """

    __slots__ = ("n", "arrows")

    def __init__(self, n, arrows):
        self.n = int(n)
        clean = {}
        for (i, j), mult in arrows.items():
            if not (1 <= i <= self.n and 1 <= j <= self.n) or i == j:
                raise ValueError(f"invalid arrow ({i}, {j}) on {self.n} vertices")
            if mult < 0:
                raise ValueError(f"negative multiplicity for arrow ({i}, {j})")
            if mult:
                if (j, i) in clean:
                    raise ValueError(
                        f"arrows in both directions between {i} and {j}"
                    )
                clean[(i, j)] = int(mult)
        self.arrows = clean

    @classmethod
    def from_matrix(cls, matrix):
        if isinstance(matrix, ExchangeMatrix):
            if not matrix.is_skew_symmetric():
                raise ValueError(
                    "only skew-symmetric exchange matrices have quiver form"
                )
            rows = matrix.rows
        else:
            rows = _validate_rows(matrix)
            if any(
                rows[i][j] != -rows[j][i]
                for i in range(len(rows))
                for j in range(len(rows))
            ):
                raise ValueError(
                    "only skew-symmetric exchange matrices have quiver form"
                )
        n = len(rows)
        arrows = {}
        for i in range(n):
            for j in range(n):
                if rows[i][j] > 0:
                    arrows[(i + 1, j + 1)] = rows[i][j]
        return cls(n, arrows)

    def to_matrix(self):
        rows = [[0] * self.n for _ in range(self.n)]
        for (i, j), mult in self.arrows.items():
            rows[i - 1][j - 1] = mult
            rows[j - 1][i - 1] = -mult
        return ExchangeMatrix(rows)

    def arrow_list(self):
        """Sorted ``(source, target, multiplicity)`` triples."""
        return sorted(
            (i, j, mult) for (i, j), mult in self.arrows.items()
        )

    def mutate(self, k):
        if not 1 <= k <= self.n:
            raise IndexError(f"mutation vertex {k} out of range 1..{self.n}")
        counts = {}
        for (i, j), mult in self.arrows.items():
            counts[(i, j)] = counts.get((i, j), 0) + mult
        for (i, mid), m1 in self.arrows.items():
            if mid != k:
                continue
            for (mid2, j), m2 in self.arrows.items():
                if mid2 != k or j == i:
                    continue
                counts[(i, j)] = counts.get((i, j), 0) + m1 * m2
        reversed_counts = {}
        for (i, j), mult in counts.items():
            key = (j, i) if k in (i, j) else (i, j)
            reversed_counts[key] = reversed_counts.get(key, 0) + mult
        arrows = {}
        pairs = {(min(i, j), max(i, j)) for (i, j) in reversed_counts}
        for i, j in sorted(pairs):
            net = reversed_counts.get((i, j), 0) - reversed_counts.get((j, i), 0)
            if net > 0:
                arrows[(i, j)] = net
            elif net < 0:
                arrows[(j, i)] = -net
        return Quiver(self.n, arrows)

    def relabel(self, permutation):
        perm = list(permutation)
        if sorted(perm) != list(range(1, self.n + 1)):
            raise ValueError(f"not a permutation of 1..{self.n}: {permutation!r}")
        position = {old: new + 1 for new, old in enumerate(perm)}
        return Quiver(
            self.n,
            {
                (position[i], position[j]): mult
                for (i, j), mult in self.arrows.items()
            },
        )

    def __eq__(self, other):
        if not isinstance(other, Quiver):
            return NotImplemented
        return self.n == other.n and self.arrows == other.arrows

    def __repr__(self):
        return f"Quiver({self.n}, {self.arrows!r})"


class Seed:
    """Exchange matrix plus cluster (and optional coefficient) data.

    The variable universe is ``x1..xN``, then ``y1..yN`` when coefficients
    are tracked, then any frozen multiplier names, in declaration order.
    ``frozen`` maps each multiplier name to the pair of exponents it
    carries on the plus and minus exchange monomials.
    """

    __slots__ = ("matrix", "cluster", "coefficients", "frozen", "variables")

    def __init__(self, matrix, cluster, coefficients=None, frozen=None):
        if not isinstance(matrix, ExchangeMatrix):
            matrix = ExchangeMatrix(matrix)
        self.matrix = matrix
        self.frozen = dict(frozen or {})
        for name, (plus, minus) in self.frozen.items():
            if plus < 0 or minus < 0:
                raise ValueError(
                    f"frozen multiplier {name!r} needs nonnegative exponents"
                )
        self.cluster = tuple(cluster)
        self.coefficients = None if coefficients is None else tuple(coefficients)
        if len(self.cluster) != matrix.n:
            raise ValueError(
                f"cluster has {len(self.cluster)} entries for a {matrix.n}x{matrix.n} matrix"
            )
        if self.coefficients is not None and len(self.coefficients) != matrix.n:
            raise ValueError("coefficient tuple length does not match matrix size")
        self.variables = self.cluster[0].variables

    @classmethod
    def initial(cls, matrix, *, with_coefficients=False, frozen=None):
        """The seed at the initial cluster ``(x1, ..., xN)``."""
        if not isinstance(matrix, ExchangeMatrix):
            matrix = ExchangeMatrix(matrix)
        n = matrix.n
        frozen = dict(frozen or {})
        names = [f"x{i}" for i in range(1, n + 1)]
        if with_coefficients:
            names += [f"y{i}" for i in range(1, n + 1)]
        names += list(frozen)
        variables = tuple(names)
        cluster = tuple(
            RationalExpression.variable(variables, f"x{i}") for i in range(1, n + 1)
        )
        coefficients = None
        if with_coefficients:
            coefficients = tuple(
                RationalExpression.variable(variables, f"y{i}")
                for i in range(1, n + 1)
            )
        return cls(matrix, cluster, coefficients, frozen)

    @property
    def n(self):
        return self.matrix.n

    def _frozen_monomials(self):
        one = RationalExpression.constant(self.variables, 1)
        plus = one
        minus = one
        for name, (p_exp, m_exp) in self.frozen.items():
            var = RationalExpression.variable(self.variables, name)
            if p_exp:
                plus = plus * var**p_exp
            if m_exp:
                minus = minus * var**m_exp
        return plus, minus

    def exchange_monomials(self, k):
        """The plus and minus products entering the exchange at direction k."""
        row = self.matrix.rows[k - 1]
        plus, minus = self._frozen_monomials()
        for i, b in enumerate(row):
            if b > 0:
                plus = plus * self.cluster[i] ** b
            elif b < 0:
                minus = minus * self.cluster[i] ** (-b)
        return plus, minus

    def mutate(self, k, budget=None):
        """Seed mutation in direction k (1-based); an involution."""
        n = self.n
        if not 1 <= k <= n:
            raise IndexError(f"mutation direction {k} out of range 1..{n}")
        plus, minus = self.exchange_monomials(k)
        new_matrix = self.matrix.mutate(k)
        new_cluster = list(self.cluster)
        if self.coefficients is None:
            exchange = plus + minus
            if not exchange.is_laurent():
                raise LaurentValidationError(
                    f"exchange numerator at direction {k} is not Laurent"
                )
            old = self.cluster[k - 1]
            if not old.is_laurent():
                raise LaurentValidationError(
                    f"cluster entry {k} is not in Laurent form"
                )
            try:
                quotient = exact_div(
                    exchange.to_laurent(), old.to_laurent(), budget=budget
                )
            except NonExactDivision as exc:
                raise LaurentValidationError(
                    f"mutation at direction {k} left a non-Laurent cluster entry"
                ) from exc
            new_cluster[k - 1] = RationalExpression(quotient)
            new_coefficients = None
        else:
            y_k = self.coefficients[k - 1]
            numerator = y_k * plus + minus
            denominator = (y_k + 1) * self.cluster[k - 1]
            new_cluster[k - 1] = numerator / denominator
            if budget is not None:
                budget.charge(new_cluster[k - 1].term_count())
            new_coefficients = []
            for j in range(n):
                if j == k - 1:
                    new_coefficients.append(y_k**-1)
                    continue
                b_jk = self.matrix.rows[j][k - 1]
                if b_jk == 0:
                    new_coefficients.append(self.coefficients[j])
                    continue
                sign = 1 if b_jk > 0 else -1
                factor = (1 + y_k ** (-sign)) ** (-b_jk)
                new_coefficients.append(self.coefficients[j] * factor)
            new_coefficients = tuple(new_coefficients)
        return Seed(new_matrix, tuple(new_cluster), new_coefficients, self.frozen)

    def relabel(self, permutation):
        """Simultaneous relabel of matrix rows/columns and cluster positions."""
        perm = [p - 1 for p in permutation]
        if sorted(perm) != list(range(self.n)):
            raise ValueError(f"not a permutation of 1..{self.n}: {permutation!r}")
        matrix = self.matrix.relabel(permutation)
        cluster = tuple(self.cluster[p] for p in perm)
        coefficients = (
            None
            if self.coefficients is None
            else tuple(self.coefficients[p] for p in perm)
        )
        return Seed(matrix, cluster, coefficients, self.frozen)

    def d_vectors(self):
        """Denominator vectors of the cluster entries in the x-variables."""
        from .laurent import extract_d_vector

        n = self.n
        vectors = []
        for entry in self.cluster:
            full = extract_d_vector(entry)
            vectors.append(tuple(full[:n]))
        return tuple(vectors)

    def fingerprint(self):
        """Short stable digest of the full seed state."""
        payload = self.to_json()
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_json(self):
        payload = {
            "schema": "seed.v1",
            "matrix": self.matrix.to_list(),
            "mode": "coefficients" if self.coefficients is not None else "free",
            "frozen": {name: list(pair) for name, pair in self.frozen.items()},
            "cluster": [serialize_rational(entry) for entry in self.cluster],
        }
        if self.coefficients is not None:
            payload["coefficients"] = [
                serialize_rational(entry) for entry in self.coefficients
            ]
        return payload

    @classmethod
    def from_json(cls, payload):
        if payload.get("schema") != "seed.v1":
            raise ValueError(f"unsupported seed schema: {payload.get('schema')!r}")
        matrix = ExchangeMatrix(payload["matrix"])
        frozen = {
            name: tuple(pair) for name, pair in payload.get("frozen", {}).items()
        }
        with_coefficients = payload.get("mode") == "coefficients"
        base = cls.initial(
            matrix, with_coefficients=with_coefficients, frozen=frozen
        )
        variables = base.variables
        cluster = payload.get("cluster")
        if cluster is not None:
            cluster = tuple(parse_rational(text, variables) for text in cluster)
        else:
            cluster = base.cluster
        coefficients = base.coefficients
        if with_coefficients and payload.get("coefficients") is not None:
            coefficients = tuple(
                parse_rational(text, variables)
                for text in payload["coefficients"]
            )
        return cls(matrix, cluster, coefficients, frozen)

    def __eq__(self, other):
        if not isinstance(other, Seed):
            return NotImplemented
        return (
            self.matrix == other.matrix
            and self.cluster == other.cluster
            and self.coefficients == other.coefficients
            and self.frozen == other.frozen
        )

    def __repr__(self):
        return f"Seed(n={self.n}, mode={'coefficients' if self.coefficients else 'free'})"


def apply_sequence(seed, directions, budget=None):
    """Mutate a seed along a sequence of 1-based directions; returns all seeds.

    The result list starts with the input seed, so its length is
    ``len(directions) + 1``.
    """
    seeds = [seed]
    for k in directions:
        seeds.append(seeds[-1].mutate(k, budget=budget))
    return seeds


class MutationHistory:
    """Tree of visited seeds supporting undo and branch navigation.

    Node 0 is the root seed.  Mutating from any node appends a child; undo
    steps to the parent without discarding the subtree, and navigating to a
    previously visited node makes it current, so alternative branches stay
    reachable.  Mutating twice in the same direction returns to a seed whose
    fingerprint matches the grandparent (involution), which the service uses
    to fold trivial backtracks.
    """

    def __init__(self, seed):
        self.nodes = [
            {"parent": None, "direction": None, "seed": seed, "children": []}
        ]
        self.current = 0

    def seed(self, index=None):
        return self.nodes[self.current if index is None else index]["seed"]

    def record(self, direction, seed):
        node = {
            "parent": self.current,
            "direction": direction,
            "seed": seed,
            "children": [],
        }
        self.nodes.append(node)
        index = len(self.nodes) - 1
        self.nodes[self.current]["children"].append(index)
        self.current = index
        return index

    def mutate(self, direction, budget=None):
        new_seed = self.seed().mutate(direction, budget=budget)
        return self.record(direction, new_seed)

    def undo(self):
        parent = self.nodes[self.current]["parent"]
        if parent is None:
            raise IndexError("already at the root seed; nothing to undo")
        self.current = parent
        return parent

    def navigate(self, index):
        if not 0 <= index < len(self.nodes):
            raise IndexError(f"history node {index} does not exist")
        self.current = index
        return index

    def summary(self):
        return [
            {
                "node": i,
                "parent": node["parent"],
                "direction": node["direction"],
                "fingerprint": node["seed"].fingerprint(),
                "children": list(node["children"]),
            }
            for i, node in enumerate(self.nodes)
        ]
