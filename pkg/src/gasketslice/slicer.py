"""Slices of the right-angle gasket: expansions, oracles, dimensions.

A point a in the projection [-p/q, 1] is addressed by the interval index k
and the binary digits xi of its top-down offset inside I_k:

    a = 1 - (k-1)/q - (1/q) * sum(xi_i / 2^i).

Three independent ways of counting the level-n cylinders whose projection
contains a are implemented and cross-checked:

* geometric: exact integer sign tests of the slice line against cylinder
  hull triangles, descending the cell tree with pruning (a line meets a
  cylinder iff it meets the hull: the hull boundary is covered by the child
  hulls, so a hull-hitting line pins a nested chain of hulls whose limit
  point lies in the gasket);
* matrix: the exact big-integer product e_k^T A_{xi_1} ... A_{xi_n} e;
* interval dynamics: brute-force enumeration of the projected ternary maps,
  matching matrix product columns entry by entry.

On top of the counts sit the per-point dimension estimates and the
conservation identity: the local dimension of the projected measure at a
plus the box dimension of the slice at a telescopes to s up to an explicit
O(1/n) envelope.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import CapacityError, ValidationError
from .exact import SlopeSpec
from .matrices import TransitionPair, build_transition_pair
from .measures import LOG2, LOG3, PerronVector, perron_vector
from .exponents import S_DIM

__all__ = [
    "DyadicPointRef",
    "GoodSetCount",
    "SliceDimensionEstimate",
    "ConservationCheck",
    "expand_point",
    "good_set_count_geometric",
    "good_set_count_matrix",
    "interval_dynamics_count",
    "slice_dimension_estimate",
    "conservation_check",
    "conservation_envelope",
]

_GEOMETRIC_DEPTH_CAP = 32
_UNPRUNED_DEPTH_CAP = 10
_TERNARY_DEPTH_CAP = 12
_EXACT_PRODUCT_CAP = 4096


# ---------------------------------------------------------------------------
# Dyadic expansions of projection points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicPointRef:
    """A point of the projection with its eventually periodic expansion.

    ``prefix`` then ``period`` repeated forever; an empty period means an
    all-zeros tail.  ``alternate`` is the second (k, expansion) coding for
    points on half-interval boundaries (its own alternate is None).  The
    canonical coding never ends in all ones except for the bottom endpoint
    a = -p/q, which has no other coding.
    """

    slope: SlopeSpec
    k: int
    prefix: Tuple[int, ...]
    period: Tuple[int, ...]
    value: Fraction
    alternate: Optional["DyadicPointRef"] = None

    @property
    def boundary(self) -> bool:
        return self.alternate is not None

    def digits(self, n: int) -> Tuple[int, ...]:
        """First n binary digits of the offset expansion."""
        if n <= len(self.prefix):
            return self.prefix[:n]
        out = list(self.prefix)
        if self.period:
            i = 0
            while len(out) < n:
                out.append(self.period[i % len(self.period)])
                i += 1
        else:
            out.extend([0] * (n - len(out)))
        return tuple(out)

    def reconstruct(self, terms: int = 200) -> Fraction:
        """Recompute the value from (k, digits); exact when terms covers the cycle."""
        q = self.slope.q
        if self.period:
            pre = self.prefix
            per = self.period
            x_pre = sum(Fraction(d, 2 ** (i + 1)) for i, d in enumerate(pre))
            num = sum(d << (len(per) - 1 - i) for i, d in enumerate(per))
            x_per = Fraction(num, (1 << len(per)) - 1) / (1 << len(pre))
            x = x_pre + x_per
        else:
            x = sum(Fraction(d, 2 ** (i + 1)) for i, d in enumerate(self.prefix))
        return 1 - Fraction(self.k - 1, q) - x / q


def _binary_expansion(x: Fraction) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """(prefix, period) of x in [0, 1); terminating expansions get period ()."""
    digits: List[int] = []
    seen: Dict[Fraction, int] = {}
    r = x
    while r != 0 and r not in seen:
        seen[r] = len(digits)
        r *= 2
        d = int(r)  # floor for 0 <= r < 2
        digits.append(d)
        r -= d
    if r == 0:
        return tuple(digits), ()
    start = seen[r]
    return tuple(digits[:start]), tuple(digits[start:])


def expand_point(slope: SlopeSpec, a) -> DyadicPointRef:
    """Locate a in its interval and expand its offset in binary.

    Boundary points (offset 0 at an interval top, or a terminating dyadic
    offset) get their second coding attached as ``alternate``: the one whose
    tail is all ones.
    """
    a = Fraction(a)
    lo, hi = slope.projection_range
    if not (lo <= a <= hi):
        raise ValidationError(f"point {a} outside projection [{lo}, {hi}]")
    q = slope.q
    y = q * (1 - a)  # in [0, p+q]
    if y == slope.m:  # bottom endpoint: the all-ones coding is the only one
        return DyadicPointRef(slope, slope.m, (), (1,), a)
    k = int(y) + 1
    x = y - int(y)
    prefix, period = _binary_expansion(x)
    alternate = None
    if x == 0 and k >= 2:
        alternate = DyadicPointRef(slope, k - 1, (), (1,), a)
    elif period == () and prefix:
        # terminating dyadic offset: flip the final 1 into 0 + all-ones tail
        alt_prefix = prefix[:-1] + (0,)
        alternate = DyadicPointRef(slope, k, alt_prefix, (1,), a)
    return DyadicPointRef(slope, k, prefix, period, a, alternate=alternate)


# ---------------------------------------------------------------------------
# Geometric oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GoodSetCount:
    """Number of level-n cylinders meeting the slice line."""

    n: int
    count: Optional[int]  # exact when available
    method: str  # "geometric" | "matrix"
    log_count: float = 0.0

    def __post_init__(self):
        if self.count is not None:
            object.__setattr__(
                self, "log_count",
                math.log(self.count) if self.count > 0 else float("-inf"),
            )


def good_set_count_geometric(slope: SlopeSpec, a, n: int,
                             prune: bool = True) -> GoodSetCount:
    """Count level-n cells whose hull meets the line y = a + (p/q) x.

    Exact integer sign predicates: with a = A/B the sign of the affine form
    at a scaled vertex (X/2^L, Y/2^L) is the sign of B(qY - pX) - qA 2^L.
    Pruning is sound because the predicate is monotone under subdivision.
    """
    a = Fraction(a)
    lo, hi = slope.projection_range
    if not (lo <= a <= hi):
        raise ValidationError(f"point {a} outside projection [{lo}, {hi}]")
    cap = _GEOMETRIC_DEPTH_CAP if prune else _UNPRUNED_DEPTH_CAP
    if not 0 <= n <= cap:
        raise CapacityError(f"geometric descent capped at n={cap} (prune={prune})")
    p, q = slope.p, slope.q
    A, B = a.numerator, a.denominator

    # A cell at depth L is the triangle with corner (Ox, Oy)/2^L and legs
    # 1/2^L; its children keep the scaled corner recursion O' = 2 O + t for
    # t in {(0,0), (1,0), (0,1)}, which nests children inside parents.
    def sign(X: int, Y: int, shift: int) -> int:
        v = B * (q * Y - p * X) - q * A * (1 << shift)
        return (v > 0) - (v < 0)

    def hits(ox: int, oy: int, level: int) -> bool:
        s = (
            sign(ox, oy, level),
            sign(ox + 1, oy, level),
            sign(ox, oy + 1, level),
        )
        return not all(x > 0 for x in s) and not all(x < 0 for x in s)

    def descend(ox: int, oy: int, level: int) -> int:
        hit = hits(ox, oy, level)
        if prune and not hit:
            return 0
        if level == n:
            return 1 if hit else 0
        total = 0
        for tx, ty in ((0, 0), (1, 0), (0, 1)):
            total += descend(2 * ox + tx, 2 * oy + ty, level + 1)
        return total

    count = descend(0, 0, 0)
    return GoodSetCount(n=n, count=count, method="geometric")


# ---------------------------------------------------------------------------
# Matrix oracle
# ---------------------------------------------------------------------------

def _pair_for(ref_or_slope) -> TransitionPair:
    slope = ref_or_slope.slope if isinstance(ref_or_slope, DyadicPointRef) else ref_or_slope
    return build_transition_pair(slope, check=False)


def good_set_count_matrix(ref: DyadicPointRef, n: int,
                          tp: Optional[TransitionPair] = None) -> GoodSetCount:
    """e_k^T A_{xi_1} ... A_{xi_n} e: exact big integers, or log form for huge n."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    tp = tp or _pair_for(ref)
    word = ref.digits(n)
    if n <= _EXACT_PRODUCT_CAP:
        u = _basis_product(tp, ref.k, word)
        return GoodSetCount(n=n, count=sum(u), method="matrix")
    from .measures import log_product

    left = [0.0] * tp.m
    left[ref.k - 1] = 1.0
    lp = log_product(tp, word, left, [1.0] * tp.m)
    return GoodSetCount(n=n, count=None, method="matrix", log_count=lp.log_value)


def _basis_product(tp: TransitionPair, k: int, word: Sequence[int]) -> List[int]:
    """Exact integer row vector e_k^T A_w."""
    m = tp.m
    mats = (tp.A0.tolist(), tp.A1.tolist())
    u = [0] * m
    u[k - 1] = 1
    for b in word:
        A = mats[b]
        u = [sum(u[i] * A[i][j] for i in range(m) if u[i]) for j in range(m)]
    return u


# ---------------------------------------------------------------------------
# Interval-dynamics oracle
# ---------------------------------------------------------------------------

_SHIFT_CACHE: Dict[Tuple[int, int, int], Counter] = {}


def _ternary_shift_counter(slope: SlopeSpec, L: int) -> Counter:
    """Multiset of scaled translation parts of all level-L composed maps.

    The composition of L projected maps is t -> t/2^L + c; scaled by
    q * 2^L the translation c is an integer, built by the recursion
    C -> C + shift * 2^(L - depth).
    """
    key = (slope.p, slope.q, L)
    if key in _SHIFT_CACHE:
        return _SHIFT_CACHE[key]
    if L > _TERNARY_DEPTH_CAP:
        raise CapacityError(f"ternary enumeration capped at length {_TERNARY_DEPTH_CAP}")
    p, q = slope.p, slope.q
    shifts = (0, q, -p)  # scaled by q * 2: the maps add 0, 1/2, -p/(2q)
    counter: Counter = Counter()

    def descend(C: int, depth: int) -> None:
        if depth == L:
            counter[C] += 1
            return
        w = 1 << (L - depth - 1)
        for s in shifts:
            descend(C + s * w, depth + 1)

    descend(0, 0)
    _SHIFT_CACHE[key] = counter
    return counter


def interval_dynamics_count(slope: SlopeSpec, j: int, word: Sequence[int]) -> np.ndarray:
    """Column of counts: how many level-L ternary maps send I_j onto I_i^word.

    Independent of the transition matrices; used to check their product
    columns entry by entry.
    """
    m = slope.m
    if not 1 <= j <= m:
        raise ValidationError(f"column index j must be in 1..{m}")
    word = tuple(int(b) for b in word)
    if any(b not in (0, 1) for b in word):
        raise ValidationError("word must be binary")
    L = len(word)
    counter = _ternary_shift_counter(slope, L)
    q = slope.q
    scale = 1 << L
    out = np.zeros(m, dtype=np.int64)
    tail = sum(d << (L - 1 - i) for i, d in enumerate(word))
    for i in range(1, m + 1):
        # scaled top of I_i^word: q*2^L - (i-1)*2^L - sum xi_l 2^(L-l)
        target = q * scale - (i - 1) * scale - tail
        c = target - (q - j + 1)
        out[i - 1] = counter.get(c, 0)
    return out


# ---------------------------------------------------------------------------
# Dimension estimates and conservation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SliceDimensionEstimate:
    """ln(count_n)/(n ln 2) along n_list plus tail proxies and periodic limit."""

    points: Tuple[Tuple[int, float], ...]
    liminf_proxy: float
    limsup_proxy: float
    periodic_limit: Optional[float]
    periodic_meta: Dict


def _reachable_rate(tp: TransitionPair, u_support: Sequence[int],
                    period: Sequence[int]) -> Tuple[float, Dict]:
    """Exact growth rate of u B^j e for B the period product.

    The rate is the spectral radius of B restricted to the states reachable
    from the support of u (paths out of the support never leave that set,
    so the restriction is exact, and reducible periods with slow rows are
    handled correctly).
    """
    m = tp.m
    B = tp.word_product(list(period))
    reach = set(u_support)
    frontier = set(u_support)
    while frontier:
        nxt = set()
        for i in frontier:
            for j in range(m):
                if B[i][j] and j not in reach:
                    nxt.add(j)
        reach |= nxt
        frontier = nxt
    idx = sorted(reach)
    # Entries are big integers (can exceed float range for long periods);
    # divide by the max entry exactly before converting.
    top = max(B[i][j] for i in idx for j in idx)
    sub = np.array(
        [[float(Fraction(B[i][j], top)) for j in idx] for i in idx], dtype=np.float64
    )
    rho_scaled = float(np.abs(np.linalg.eigvals(sub)).max())
    log_rho = math.log(top) + math.log(rho_scaled)
    rate = log_rho / (len(period) * LOG2)
    return rate, {"period_len": len(period), "reachable": idx, "log_rho": log_rho}


def slice_dimension_estimate(ref: DyadicPointRef, n_list: Sequence[int],
                             tp: Optional[TransitionPair] = None) -> SliceDimensionEstimate:
    """Finite-depth dimension estimates of the slice through ref.

    For eventually periodic expansions (always, for rational points) the
    exact limiting rate of the periodic matrix product is reported alongside
    the finite-n sequence.
    """
    tp = tp or _pair_for(ref)
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list or n_list[0] < 1:
        raise ValidationError("n_list must contain positive depths")
    pts = []
    for n in n_list:
        gc = good_set_count_matrix(ref, n, tp)
        val = (gc.log_count if gc.count is None else math.log(gc.count)) / (n * LOG2)
        pts.append((n, val))
    tail = pts[len(pts) // 2:]
    liminf_proxy = min(v for _, v in tail)
    limsup_proxy = max(v for _, v in tail)
    period = ref.period if ref.period else (0,)
    u = _basis_product(tp, ref.k, ref.prefix)
    support = [j for j, x in enumerate(u) if x]
    rate, meta = _reachable_rate(tp, support, period)
    return SliceDimensionEstimate(
        points=tuple(pts),
        liminf_proxy=liminf_proxy,
        limsup_proxy=limsup_proxy,
        periodic_limit=rate,
        periodic_meta=meta,
    )


@dataclass(frozen=True)
class ConservationCheck:
    """Finite-depth check of local_dim + box_dim = s along the expansion."""

    n: int
    local_dim: float
    box_dim: float
    deviation: float
    degenerate: bool = False


def conservation_check(ref: DyadicPointRef, n: int,
                       tp: Optional[TransitionPair] = None,
                       pv: Optional[PerronVector] = None) -> ConservationCheck:
    """Evaluate both finite-depth dimensions at ref and their deviation from s.

    local_dim_n is the scaling of the projected measure of the level-n
    interval around ref (via the component weight e_k A_w p); box_dim_n is
    the matrix cylinder count rate.  Their sum exceeds s by exactly
    ln(e_k A_w e / e_k A_w p)/(n ln 2), which the Perron bounds squeeze into
    the O(1/n) envelope.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if n > _EXACT_PRODUCT_CAP:
        raise CapacityError(f"conservation check capped at n={_EXACT_PRODUCT_CAP}")
    tp = tp or _pair_for(ref)
    pv = pv or perron_vector(tp)
    word = ref.digits(n)
    u = _basis_product(tp, ref.k, word)
    count = sum(u)
    if count == 0:
        return ConservationCheck(n, float("nan"), float("nan"), float("nan"),
                                 degenerate=True)
    D = pv.common_denominator
    nums = pv.numerators
    weight_num = sum(ui * wi for ui, wi in zip(u, nums))  # e_k A_w p = weight_num / D
    log_weight = math.log(weight_num) - math.log(D)
    local = (n * LOG3 - log_weight) / (n * LOG2)
    box = math.log(count) / (n * LOG2)
    return ConservationCheck(n, local, box, local + box - S_DIM)


def conservation_envelope(pv: PerronVector, m: int, n: int) -> float:
    """Explicit O(1/n) bound (ln(1/p_min) + ln m)/(n ln 2) on the deviation."""
    p_min = pv.p_min
    return (math.log(p_min.denominator) - math.log(p_min.numerator) + math.log(m)) / (n * LOG2)
