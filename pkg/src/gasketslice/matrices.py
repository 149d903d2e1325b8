"""Transition matrices of the projected interval dynamics.

For a slope p/q the projection of the right-angle gasket to the y-axis is
[-p/q, 1], tiled by m = p+q intervals I_k of length 1/q counted from the top:

    I_k = [1 - k/q, 1 - (k-1)/q],   k = 1..m.

Each I_k splits into two halves addressed by a binary digit counted from the
top of I_k (digit 0 is the upper half).  The projected maps

    f0(t) = t/2,   f1(t) = t/2 + 1/2,   f2(t) = t/2 - p/(2q)

send every I_j exactly onto one of the 2m half-intervals, and the pair of
0/1 matrices A0, A1 records which:

    A[d][i, j] = #{ maps sending I_j onto the digit-d half of I_i }.

Two independent constructions are provided (exact interval images vs a
residue rule derived from them) plus validators for the structural facts the
rest of the package leans on: 1-2 ones per row and column, column sums of
A0 + A1 equal to 3, a column-covering permutation submatrix in each matrix,
and a primitive product word of bounded length.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import CapacityError, InvariantViolation, ValidationError
from .exact import SlopeSpec

__all__ = [
    "IntervalPartition",
    "TransitionPair",
    "PrimitivityCertificate",
    "ValidationReport",
    "build_partition",
    "build_matrices_geometric",
    "build_matrices_congruence",
    "build_transition_pair",
    "validate_structure",
    "find_primitive_word",
    "count_degenerate_words",
    "degenerate_count_bound",
    "matrices_to_csv",
    "matrices_to_json",
]


# ---------------------------------------------------------------------------
# Interval partition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalPartition:
    """The m = p+q unit-length/q intervals tiling the projection, with halves."""

    slope: SlopeSpec
    intervals: Tuple[Tuple[Fraction, Fraction], ...]

    @property
    def m(self) -> int:
        return self.slope.m

    def interval(self, k: int) -> Tuple[Fraction, Fraction]:
        """Closed interval I_k, 1-based k."""
        return self.intervals[k - 1]

    def half(self, k: int, digit: int) -> Tuple[Fraction, Fraction]:
        """Digit-addressed half of I_k; digit 0 is the upper half.

        The digit is the next binary digit in the top-down expansion
        a = 1 - (k-1)/q - (1/q) * sum(xi_i / 2^i), so digit 0 keeps the
        point in the upper half [mid, top].
        """
        lo, hi = self.interval(k)
        mid = (lo + hi) / 2
        if digit == 0:
            return mid, hi
        if digit == 1:
            return lo, mid
        raise ValidationError(f"binary digit expected, got {digit}")

    def locate_half(self, lo: Fraction, hi: Fraction) -> Optional[Tuple[int, int]]:
        """(k, digit) whose half-interval equals [lo, hi] exactly, else None."""
        q = self.slope.q
        # Half-intervals have length 1/(2q) and tops on the 1/(2q) grid:
        # top of half (k, d) is 1 - (2(k-1) + d) / (2q).
        if hi - lo != Fraction(1, 2 * q):
            return None
        r = (1 - hi) * 2 * q
        if r.denominator != 1:
            return None
        r = int(r)
        if not 0 <= r <= 2 * self.m - 1:
            return None
        return r // 2 + 1, r % 2


def build_partition(slope: SlopeSpec) -> IntervalPartition:
    """Exact rational partition of [-p/q, 1] into p+q intervals of length 1/q."""
    q = slope.q
    ivs = tuple(
        (Fraction(q - k, q), Fraction(q - k + 1, q)) for k in range(1, slope.m + 1)
    )
    return IntervalPartition(slope, ivs)


# ---------------------------------------------------------------------------
# Transition pair
# ---------------------------------------------------------------------------

def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TransitionPair:
    """The two m x m transition matrices plus the partition they came from."""

    slope: SlopeSpec
    A0: np.ndarray
    A1: np.ndarray
    partition: IntervalPartition
    builder: str = "geometric"

    @property
    def m(self) -> int:
        return self.slope.m

    def matrix(self, digit: int) -> np.ndarray:
        return self.A0 if digit == 0 else self.A1

    def word_product(self, word: Sequence[int]) -> List[List[int]]:
        """Exact big-integer product A_{w1} ... A_{wn} (nested lists)."""
        m = self.m
        mats = (self.A0.tolist(), self.A1.tolist())
        prod = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
        for b in word:
            right = mats[b]
            prod = [
                [
                    sum(prod[i][k] * right[k][j] for k in range(m) if prod[i][k])
                    for j in range(m)
                ]
                for i in range(m)
            ]
        return prod

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TransitionPair)
            and self.slope == other.slope
            and np.array_equal(self.A0, other.A0)
            and np.array_equal(self.A1, other.A1)
        )


def build_matrices_geometric(slope: SlopeSpec) -> TransitionPair:
    """Build A0, A1 by computing every interval image exactly.

    Every f_k(I_j) must land exactly on a half-interval of the partition;
    anything else means the partition (not the input) is broken, so it
    raises InvariantViolation rather than returning garbage.
    """
    part = build_partition(slope)
    p, q, m = slope.p, slope.q, slope.m
    shifts = (Fraction(0), Fraction(1, 2), Fraction(-p, 2 * q))
    A = [np.zeros((m, m), dtype=np.int64) for _ in range(2)]
    for j in range(1, m + 1):
        lo, hi = part.interval(j)
        for sh in shifts:
            img = (lo / 2 + sh, hi / 2 + sh)
            hit = part.locate_half(*img)
            if hit is None:
                raise InvariantViolation(
                    f"image of I_{j} under shift {sh} is not a half-interval: {img}"
                )
            i, digit = hit
            A[digit][i - 1, j - 1] += 1
    return TransitionPair(slope, _frozen(A[0]), _frozen(A[1]), part, builder="geometric")


def build_matrices_congruence(slope: SlopeSpec) -> TransitionPair:
    """Build A0, A1 from the residue rule equivalent to the interval images.

    With rows/columns 1-based and residues represented in {1, ..., m}:

        A[d][i, j] = 1  iff  j == 2i - 1 + d (mod m)
                     or  q+1 <= 2i - 1 + d <= 2q + p  and
                         j == 2i - 1 + d - q (mod m).

    The first clause covers the two maps without the -p/(2q) shift (which of
    the two applies is determined by whether 2i-1+d exceeds m); the gated
    clause covers the shifted map.
    """
    p, q, m = slope.p, slope.q, slope.m
    A = [np.zeros((m, m), dtype=np.int64) for _ in range(2)]
    for d in (0, 1):
        for i in range(1, m + 1):
            r = 2 * i - 1 + d
            j = (r - 1) % m + 1
            A[d][i - 1, j - 1] = 1
            if q + 1 <= r <= 2 * q + p:
                j2 = (r - q - 1) % m + 1
                A[d][i - 1, j2 - 1] = 1
    part = build_partition(slope)
    return TransitionPair(slope, _frozen(A[0]), _frozen(A[1]), part, builder="congruence")


def build_transition_pair(slope: SlopeSpec, check: bool = True) -> TransitionPair:
    """Geometric build, cross-checked against the congruence rule.

    The two constructions are independent enough that agreement is a strong
    smoke test; disagreement is an InvariantViolation.
    """
    geo = build_matrices_geometric(slope)
    if check:
        cong = build_matrices_congruence(slope)
        if not (np.array_equal(geo.A0, cong.A0) and np.array_equal(geo.A1, cong.A1)):
            raise InvariantViolation(f"builders disagree for {slope}")
    return geo


# ---------------------------------------------------------------------------
# Structural validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    """Outcome of the structural checks; empty failures means all good."""

    slope: SlopeSpec
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __str__(self) -> str:
        if self.ok:
            return f"{self.slope}: structure OK"
        return f"{self.slope}: " + "; ".join(self.failures)


def _has_column_covering_matching(A: np.ndarray) -> bool:
    """True iff A contains a permutation submatrix covering all columns."""
    match = maximum_bipartite_matching(csr_matrix(A), perm_type="row")
    return bool(np.all(match >= 0))


def validate_structure(tp: TransitionPair) -> ValidationReport:
    """Check the structural facts about A0, A1; never raises.

    (a) every row and column of each matrix has one or two ones,
    (b) each column of A0 + A1 sums to exactly 3,
    (c) each matrix admits a column-covering permutation submatrix.
    """
    rep = ValidationReport(tp.slope)
    for d, A in ((0, tp.A0), (1, tp.A1)):
        if not np.isin(A, (0, 1)).all():
            rep.failures.append(f"A{d}: entries outside {{0,1}}")
        for axis, name in ((0, "column"), (1, "row")):
            sums = A.sum(axis=axis)
            bad = np.where((sums < 1) | (sums > 2))[0]
            for idx in bad:
                rep.failures.append(
                    f"A{d}: {name} {idx + 1} has {int(sums[idx])} ones (need 1 or 2)"
                )
        if not _has_column_covering_matching(A):
            rep.failures.append(f"A{d}: no column-covering permutation submatrix")
    colsums = (tp.A0 + tp.A1).sum(axis=0)
    for idx in np.where(colsums != 3)[0]:
        rep.failures.append(
            f"A0+A1: column {idx + 1} sums to {int(colsums[idx])} (need 3)"
        )
    return rep


# ---------------------------------------------------------------------------
# Zero-pattern machinery: primitivity and degenerate words
# ---------------------------------------------------------------------------

def _column_patterns(A: np.ndarray) -> Tuple[int, ...]:
    """Matrix zero/nonzero pattern as per-column row-set bitmasks."""
    m = A.shape[0]
    return tuple(
        int(sum(1 << i for i in range(m) if A[i, j])) for j in range(m)
    )


def _pattern_step(pattern: Tuple[int, ...], letter_cols: Tuple[Tuple[int, ...], ...]) -> Tuple[int, ...]:
    """Pattern of P @ A_b given P's column masks and A_b's column supports."""
    new = []
    for support in letter_cols:
        acc = 0
        for k in support:
            acc |= pattern[k]
        new.append(acc)
    return tuple(new)


def _letter_column_supports(A: np.ndarray) -> Tuple[Tuple[int, ...], ...]:
    m = A.shape[0]
    return tuple(
        tuple(k for k in range(m) if A[k, j]) for j in range(m)
    )


@dataclass(frozen=True)
class PrimitivityCertificate:
    """A word whose matrix product is entrywise positive, with proof data."""

    word: Tuple[int, ...]
    n0: int
    product_min_entry: int

    def __post_init__(self):
        if self.product_min_entry < 1:
            raise InvariantViolation("certificate product has a zero entry")


def find_primitive_word(tp: TransitionPair) -> PrimitivityCertificate:
    """Shortest word whose product pattern is all-positive, by BFS on patterns.

    Only the zero/nonzero pattern matters for positivity, so the search state
    is a tuple of m column bitmasks; the certificate re-multiplies the found
    word in big integers to report the exact minimal entry.
    """
    m = tp.m
    full = (1 << m) - 1
    target = tuple([full] * m)
    supports = (_letter_column_supports(tp.A0), _letter_column_supports(tp.A1))
    start = {
        _column_patterns(tp.A0): (0,),
        _column_patterns(tp.A1): (1,),
    }
    bound = m * (m - 1) + 1
    frontier = dict(start)
    seen = set(frontier)
    for pattern, word in frontier.items():
        if pattern == target:
            return _certify(tp, word)
    for _ in range(bound - 1):
        nxt: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
        for pattern, word in frontier.items():
            for b in (0, 1):
                np_ = _pattern_step(pattern, supports[b])
                if np_ in seen or np_ in nxt:
                    continue
                w = word + (b,)
                if np_ == target:
                    return _certify(tp, w)
                nxt[np_] = w
        seen.update(nxt)
        frontier = nxt
        if not frontier:
            break
    raise InvariantViolation(
        f"no positive product of length <= {bound} for {tp.slope}; builder bug"
    )


def _certify(tp: TransitionPair, word: Tuple[int, ...]) -> PrimitivityCertificate:
    prod = tp.word_product(word)
    mn = min(min(row) for row in prod)
    if mn < 1:
        raise InvariantViolation("pattern BFS claimed positivity but product has a zero")
    return PrimitivityCertificate(word=word, n0=len(word), product_min_entry=mn)


def count_degenerate_words(tp: TransitionPair, n: int) -> int:
    """Exact number of length-n binary words whose product has a zero entry.

    Dynamic programming over zero/nonzero patterns: equal products share a
    pattern, so the state space stays tiny compared with 2^n.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if n > 64:
        raise CapacityError(f"degenerate-word count capped at n=64, got {n}")
    m = tp.m
    full = (1 << m) - 1
    target = tuple([full] * m)
    supports = (_letter_column_supports(tp.A0), _letter_column_supports(tp.A1))
    counts: Dict[Tuple[int, ...], int] = {
        _column_patterns(tp.A0): 1,
    }
    p1 = _column_patterns(tp.A1)
    counts[p1] = counts.get(p1, 0) + 1
    positive = counts.pop(target, 0)
    for _ in range(n - 1):
        positive *= 2
        nxt: Dict[Tuple[int, ...], int] = {}
        for pattern, c in counts.items():
            for b in (0, 1):
                np_ = _pattern_step(pattern, supports[b])
                if np_ == target:
                    positive += c
                else:
                    nxt[np_] = nxt.get(np_, 0) + c
        counts = nxt
    return (1 << n) - positive


def degenerate_count_bound(m: int, n: int) -> int:
    """Combinatorial upper bound sum_{l=0}^{(m-1)m-1} C(n, l) * 2^l."""
    top = (m - 1) * m - 1
    return sum(math.comb(n, l) << l for l in range(0, min(top, n) + 1))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def matrices_to_csv(tp: TransitionPair) -> str:
    """Row-major CSV of both matrices with a slope header."""
    buf = io.StringIO()
    buf.write(f"# p={tp.slope.p},q={tp.slope.q},m={tp.m}\n")
    buf.write("matrix,row," + ",".join(f"c{j}" for j in range(1, tp.m + 1)) + "\n")
    for name, A in (("A0", tp.A0), ("A1", tp.A1)):
        for i in range(tp.m):
            buf.write(f"{name},{i + 1}," + ",".join(str(int(x)) for x in A[i]) + "\n")
    return buf.getvalue()


def matrices_to_json(tp: TransitionPair) -> str:
    return json.dumps(
        {
            "p": tp.slope.p,
            "q": tp.slope.q,
            "m": tp.m,
            "A0": tp.A0.tolist(),
            "A1": tp.A1.tolist(),
        },
        indent=2,
        sort_keys=True,
    )
