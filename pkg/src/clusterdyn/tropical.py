"""Max-plus shadow of cluster recurrences and degree-growth classification.

Substituting ``x_n = t^{d_n}`` and keeping only leading behaviour turns the
two-monomial exchange relation into the tropical (max-plus) recurrence

    d_n + d_{n+N} = max( sum_j p_j d_{n+j} , sum_j q_j d_{n+j} )

whose orbit from the initial data ``(-1, 0, ..., 0)`` reproduces the degree
sequence of the first symbolic iterate's denominator exponents.  The shape
of this integer sequence classifies the algebraic entropy of the map:

* ``bounded``    - the degrees are eventually periodic (entropy 0);
* ``linear``     - first differences eventually periodic (entropy 0);
* ``quadratic``  - second differences eventually periodic (entropy 0);
* ``exponential``- degrees eventually satisfy a linear recurrence whose
  dominant real root exceeds 1; the entropy is the log of that root.

A slope fit on ``log d_n`` is used as a last resort and is flagged
approximate.  Separately, ``zero_entropy_predict`` decides zero versus
positive entropy directly from the exponent vector: entropy is positive
exactly when ``max(sum_j [a_j]+, sum_j [-a_j]+) >= 3``, and the sub-bound
vectors fall into four structural families with known growth (a single
middle entry; an opposite pair; a pair plus an opposite middle entry; two
pairs of opposite signs).  The exhaustive sweep in the test suite checks
the predictor against the empirical classifier on every small palindrome.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

from .linalg import largest_real_root, minimal_linear_recurrence
from .periodicity import RecurrenceSpec, is_palindrome

__all__ = [
    "TropicalSystem",
    "tropicalize",
    "iterate_tropical",
    "find_eventual_period",
    "GrowthReport",
    "classify_growth",
    "GrowthPrediction",
    "zero_entropy_predict",
]


@dataclass(frozen=True)
class TropicalSystem:
    """Max-plus recurrence data: window size and the two exponent loads."""

    order: int
    plus: tuple  # ((offset, exponent), ...)
    minus: tuple

    def step(self, window):
        plus = sum(e * window[j] for j, e in self.plus)
        minus = sum(e * window[j] for j, e in self.minus)
        return max(plus, minus) - window[0]


def tropicalize(spec):
    """The max-plus shadow of a recurrence (frozen multipliers drop out)."""
    if isinstance(spec, TropicalSystem):
        return spec
    if isinstance(spec, RecurrenceSpec):
        return TropicalSystem(spec.order, spec.plus, spec.minus)
    raise TypeError(f"cannot tropicalize {type(spec).__name__}")


def iterate_tropical(system, steps, inits=None):
    """Integer orbit of the tropical recurrence.

    Default initial data is ``(-1, 0, ..., 0)``, which tracks the exponent
    of the first initial cluster variable in the denominators of symbolic
    iterates, so the orbit prefix matches ``extract_d_vector`` component 1.
    """
    system = tropicalize(system)
    if inits is None:
        values = [-1] + [0] * (system.order - 1)
    else:
        values = [int(v) for v in inits]
        if len(values) != system.order:
            raise ValueError(
                f"need {system.order} initial values, got {len(values)}"
            )
    for n in range(steps):
        values.append(system.step(values[n : n + system.order]))
    return values


def find_eventual_period(sequence, max_period=64, max_onset=None):
    """Smallest (period, onset) making the suffix periodic, or None.

    Requires at least two full matched periods after the onset and caps the
    onset at half the sequence length, so short accidental repeats are not
    reported.  The period is minimized first, then the onset.
    """
    seq = list(sequence)
    length = len(seq)
    onset_cap = length // 2 if max_onset is None else max_onset
    for period in range(1, max_period + 1):
        if 2 * period > length:
            return None
        latest_mismatch = -1
        for i in range(length - period - 1, -1, -1):
            if seq[i] != seq[i + period]:
                latest_mismatch = i
                break
        onset = latest_mismatch + 1
        if onset <= onset_cap and length - onset >= 2 * period:
            return onset, period
    return None


def _differences(seq, stride=1):
    return [seq[i + stride] - seq[i] for i in range(len(seq) - stride)]


@dataclass(frozen=True)
class GrowthReport:
    """Outcome of the empirical degree-growth classification."""

    classification: str  # bounded | linear | quadratic | exponential | inconclusive
    entropy: float
    length: int
    onset: int | None = None
    period: int | None = None
    stride: int = 1
    recurrence: tuple | None = None
    dominant_root: float | None = None
    approximate: bool = False

    def to_json(self):
        return {
            "classification": self.classification,
            "entropy": self.entropy,
            "length": self.length,
            "onset": self.onset,
            "period": self.period,
            "stride": self.stride,
            "recurrence": None
            if self.recurrence is None
            else [str(c) for c in self.recurrence],
            "dominant_root": self.dominant_root,
            "approximate": self.approximate,
        }


def classify_growth(
    sequence, max_period=64, min_length=30, max_order=12, max_stride=12
):
    """Classify a degree sequence by the periodicity/recurrence cascade.

    A quasi-polynomial sequence (polynomial growth whose coefficients cycle
    with some period p) has eventually periodic strided differences
    ``d[n+p] - d[n]``, so boundedness and linear/quadratic growth are
    detected by testing strides ``1..max_stride`` at difference depths
    0, 1, 2.  Exponential sequences never pass those tests; they are caught
    by an exact integer linear recurrence on a suffix, whose dominant real
    root gives the entropy.  A log-slope fit is the last resort and is
    flagged approximate.
    """
    seq = [int(v) for v in sequence]
    length = len(seq)
    if length < min_length:
        return GrowthReport("inconclusive", 0.0, length)
    hit = find_eventual_period(seq, max_period=max_period)
    if hit is not None:
        return GrowthReport(
            "bounded", 0.0, length, onset=hit[0], period=hit[1]
        )
    for depth, name in ((1, "linear"), (2, "quadratic")):
        for stride in range(1, max_stride + 1):
            level = seq
            for _ in range(depth):
                level = _differences(level, stride)
            hit = find_eventual_period(level, max_period=max_period)
            if hit is not None:
                return GrowthReport(
                    name, 0.0, length, onset=hit[0], period=hit[1],
                    stride=stride,
                )
    onset = 0
    while onset <= length // 2:
        tail = seq[onset:]
        recurrence = minimal_linear_recurrence(tail, max_order=max_order)
        if recurrence is not None:
            root = largest_real_root(recurrence)
            if root is not None:
                return GrowthReport(
                    "exponential",
                    log(root),
                    length,
                    onset=onset,
                    recurrence=recurrence,
                    dominant_root=root,
                )
            break
        onset = 1 if onset == 0 else onset * 2
    positive = [(n, v) for n, v in enumerate(seq) if v > 0]
    tail = positive[len(positive) * 2 // 3 :]
    if len(tail) >= 8:
        xs = [n for n, _ in tail]
        ys = [log(v) for _, v in tail]
        n_pts = len(xs)
        mean_x = sum(xs) / n_pts
        mean_y = sum(ys) / n_pts
        var = sum((x - mean_x) ** 2 for x in xs)
        if var > 0:
            slope = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / var
            if slope > 0.02:
                return GrowthReport(
                    "exponential", slope, length, approximate=True
                )
    return GrowthReport("inconclusive", 0.0, length)


@dataclass(frozen=True)
class GrowthPrediction:
    """Entropy verdict read directly off the exponent palindrome."""

    zero_entropy: bool
    family: str | None
    predicted_class: str | None
    parameters: dict

    def to_json(self):
        return {
            "zero_entropy": self.zero_entropy,
            "family": self.family,
            "predicted_class": self.predicted_class,
            "parameters": dict(self.parameters),
        }


def _family_match(coeffs):
    """Match a signed palindrome against the four zero-entropy families."""
    n = len(coeffs) + 1
    plus = {j: c for j, c in enumerate(coeffs, start=1) if c > 0}
    minus = {j: -c for j, c in enumerate(coeffs, start=1) if c < 0}

    def pair_of(support):
        """The pair (q, N-q) a weight-2 positive support represents, or None."""
        items = sorted(support.items())
        if len(items) == 2:
            (j1, e1), (j2, e2) = items
            if e1 == e2 == 1 and j1 + j2 == n:
                return j1
        if len(items) == 1:
            (j, e), = items
            if e == 2 and 2 * j == n:
                return j
        return None

    if not minus:
        if len(plus) == 1:
            (j, e), = plus.items()
            if e == 1 and 2 * j == n:
                return "single-middle", "bounded", {"m": j}
        q = pair_of(plus)
        if q is not None:
            return "opposite-pair", "linear", {"q": q}
        return None
    if not plus:
        return None
    q_plus = pair_of(plus)
    if q_plus is not None and len(minus) == 1:
        (j, e), = minus.items()
        if e == 1 and 2 * j == n and j != q_plus:
            return "pair-with-middle", "linear", {"q": q_plus, "m": j}
    q_minus = pair_of(minus)
    if q_plus is not None and q_minus is not None and q_plus != q_minus:
        p, q = sorted((q_plus, q_minus))
        return "double-pair", "quadratic", {"p": p, "q": q}
    return None


def zero_entropy_predict(coeffs):
    """Predict entropy class of the recurrence built from a palindrome.

    Positive entropy exactly when either exchange monomial has total degree
    at least 3; otherwise the vector belongs to one of the four structural
    families with known bounded/linear/quadratic growth.
    """
    a = tuple(int(c) for c in coeffs)
    if not is_palindrome(a):
        raise ValueError(f"coefficient vector {a!r} is not palindromic")
    d_plus = sum(c for c in a if c > 0)
    d_minus = sum(-c for c in a if c < 0)
    if max(d_plus, d_minus) >= 3:
        return GrowthPrediction(False, None, "exponential", {})
    if not any(a):
        return GrowthPrediction(True, "empty-exchange", "bounded", {})
    for candidate in (a, tuple(-c for c in a)):
        match = _family_match(candidate)
        if match is not None:
            family, predicted, params = match
            return GrowthPrediction(True, family, predicted, params)
    return GrowthPrediction(True, None, None, {})
