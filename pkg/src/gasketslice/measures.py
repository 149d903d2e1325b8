"""Perron vector, scaled matrix-product functionals and the word measure.

The column sums of A0 + A1 are all 3, so (A0 + A1)/3 is column-stochastic and
has a unique positive stationary vector p with (A0 + A1) p = 3 p (unique
because some product word is entrywise positive).  That vector defines a
probability measure on binary words,

    eta([w]) = 3^{-n} * e^T A_{w_1} ... A_{w_n} p,

which is both consistent (summing over one more letter preserves mass) and
left-shift invariant.  Everything downstream that weights words by eta or
evaluates log e^T A_w v growth lives here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvariantViolation, ValidationError
from .matrices import TransitionPair

__all__ = [
    "PerronVector",
    "LogProductValue",
    "perron_vector",
    "log_product",
    "product_value_exact",
    "eta_weight",
    "eta_weight_exact",
    "eta_components_exact",
    "sample_eta",
]

LOG2 = math.log(2.0)
LOG3 = math.log(3.0)


# ---------------------------------------------------------------------------
# Perron vector (exact rational solve)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerronVector:
    """Positive probability vector p with (A0 + A1) p = 3 p, exact."""

    entries: Tuple[Fraction, ...]

    @property
    def floats(self) -> np.ndarray:
        return np.array([float(x) for x in self.entries], dtype=np.float64)

    @property
    def p_min(self) -> Fraction:
        return min(self.entries)

    @property
    def common_denominator(self) -> int:
        d = 1
        for x in self.entries:
            d = d * x.denominator // math.gcd(d, x.denominator)
        return d

    @property
    def numerators(self) -> Tuple[int, ...]:
        """Integer numerators over the common denominator (sums to it)."""
        d = self.common_denominator
        return tuple(int(x * d) for x in self.entries)


def _rational_nullspace(M: List[List[Fraction]]) -> List[List[Fraction]]:
    """Basis of the nullspace of a square matrix over Q (Gaussian elimination)."""
    m = len(M)
    A = [row[:] for row in M]
    pivots: List[int] = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * m
        v[fc] = Fraction(1)
        for row, pc in zip(A, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


def perron_vector(tp: TransitionPair) -> PerronVector:
    """Exact stationary vector of (A0 + A1)/3, normalised to sum 1.

    Solved as the rational nullspace of A0 + A1 - 3I; a nullspace of
    dimension other than one, or any non-positive entry, indicates a broken
    transition pair and raises InvariantViolation.
    """
    m = tp.m
    S = (tp.A0 + tp.A1).tolist()
    M = [
        [Fraction(S[i][j] - (3 if i == j else 0)) for j in range(m)]
        for i in range(m)
    ]
    basis = _rational_nullspace(M)
    if len(basis) != 1:
        raise InvariantViolation(
            f"eigenspace of eigenvalue 3 has dimension {len(basis)}, expected 1"
        )
    v = basis[0]
    total = sum(v)
    if total == 0:
        raise InvariantViolation("nullspace vector sums to zero")
    p = tuple(x / total for x in v)
    if any(x <= 0 for x in p):
        raise InvariantViolation("Perron vector has a non-positive entry")
    # Exact residual check: (A0+A1) p == 3 p.
    for i in range(m):
        if sum(Fraction(S[i][j]) * p[j] for j in range(m)) != 3 * p[i]:
            raise InvariantViolation("Perron residual is nonzero")
    return PerronVector(p)


# ---------------------------------------------------------------------------
# Log-scaled product functionals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogProductValue:
    """ln(left^T A_{w_1} ... A_{w_n} right); -inf marks an exact zero product."""

    log_value: float
    word_length: int

    @property
    def is_zero(self) -> bool:
        return self.log_value == float("-inf")


def log_product(
    tp: TransitionPair,
    word: Sequence[int],
    left: Sequence[float],
    right: Sequence[float],
) -> LogProductValue:
    """Evaluate ln(left^T A_w right) with per-step renormalisation.

    The running row vector is rescaled to unit 1-norm after every letter and
    the scale factors accumulate in log space, so words of any length stay
    inside float range.  An exact zero product (possible for basis-seeded
    left vectors) yields -inf rather than an exception.
    """
    u = np.asarray(left, dtype=np.float64).copy()
    if np.any(u < 0) or np.any(np.asarray(right, dtype=np.float64) < 0):
        raise ValidationError("left and right must be nonnegative")
    mats = (tp.A0.astype(np.float64), tp.A1.astype(np.float64))
    acc = 0.0
    for b in word:
        u = u @ mats[b]
        s = float(u.sum())
        if s == 0.0:
            return LogProductValue(float("-inf"), len(word))
        acc += math.log(s)
        u /= s
    final = float(u @ np.asarray(right, dtype=np.float64))
    if final == 0.0:
        return LogProductValue(float("-inf"), len(word))
    return LogProductValue(acc + math.log(final), len(word))


def product_value_exact(
    tp: TransitionPair,
    word: Sequence[int],
    left: Sequence[int],
    right: Sequence[Fraction],
):
    """Exact left^T A_w right over big integers / Fractions (oracle path)."""
    m = tp.m
    mats = (tp.A0.tolist(), tp.A1.tolist())
    u = [int(x) for x in left]
    for b in word:
        A = mats[b]
        u = [sum(u[k] * A[k][j] for k in range(m)) for j in range(m)]
    return sum(u[j] * right[j] for j in range(m))


# ---------------------------------------------------------------------------
# The word measure eta and its components
# ---------------------------------------------------------------------------

def eta_weight(tp: TransitionPair, pv: PerronVector, word: Sequence[int]) -> float:
    """eta([w]) = 3^{-n} e^T A_w p as a float in [0, 1]."""
    n = len(word)
    ones = [1.0] * tp.m
    lp = log_product(tp, word, ones, pv.floats)
    if lp.is_zero:
        return 0.0
    return math.exp(lp.log_value - n * LOG3)


def eta_weight_exact(tp: TransitionPair, pv: PerronVector, word: Sequence[int]) -> Fraction:
    """Exact rational eta([w]); the float path must agree to ~1e-12."""
    n = len(word)
    val = product_value_exact(tp, word, [1] * tp.m, pv.entries)
    return Fraction(val) / Fraction(3) ** n


def eta_components_exact(
    tp: TransitionPair, pv: PerronVector, word: Sequence[int]
) -> Tuple[Fraction, ...]:
    """The decomposition eta_k([w]) = 3^{-n} e_k^T A_w p, exact, k = 1..m."""
    n = len(word)
    out = []
    for k in range(tp.m):
        left = [0] * tp.m
        left[k] = 1
        val = product_value_exact(tp, word, left, pv.entries)
        out.append(Fraction(val) / Fraction(3) ** n)
    return tuple(out)


def sample_eta(
    tp: TransitionPair,
    pv: PerronVector,
    n: int,
    rng_seed: int,
) -> np.ndarray:
    """Draw one word of length n from eta, deterministically from the seed.

    Sequential conditionals: with u = e^T A_{w_1..w_k} (renormalised), the
    next letter is b with probability (u A_b p) / (u (A0+A1) p).
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    from ._kernels import sample_eta_words

    rng = np.random.default_rng(rng_seed)
    uniforms = rng.random((1, n))
    bits, _ = sample_eta_words(
        tp.A0.astype(np.float64), tp.A1.astype(np.float64), pv.floats, uniforms
    )
    return bits[0]
