"""Typical slice dimensions and the growth envelope.

Two growth exponents of the matrix products govern the slices:

* ``alpha``: the fair-coin average of (1/n) ln e^T A_w e, divided by ln 2.
  The Lebesgue-typical slice dimension.  n times the exact enumeration value
  a_n is subadditive, so every a_n is a certified upper bound and the
  sequence decreases along n -> 2n.
* ``beta``: the same growth rate with words weighted by the stationary word
  measure and the Perron vector on the right.  The dimension of slices at
  measure-typical offsets; its companion s - b_n estimates the dimension of
  the projected measure.

Exact enumeration works by tallying the (integer) product functionals over
all 2^n words; Monte Carlo modes estimate the same limits at depths far
beyond enumeration.  Finite-depth values carry O(1/n) bias, so a Richardson
mode (2*x_{2n} - x_n) is provided and flagged in the estimate metadata.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import CapacityError, InvariantViolation, ValidationError
from .matrices import TransitionPair
from .measures import LOG2, LOG3, PerronVector, perron_vector

__all__ = [
    "ExponentEstimate",
    "GrowthEnvelope",
    "S_DIM",
    "alpha_exact",
    "alpha_monte_carlo",
    "alpha_richardson",
    "beta_exact",
    "beta_monte_carlo",
    "beta_richardson",
    "growth_envelope",
    "tally_cached",
]

S_DIM = LOG3 / LOG2  # ambient gasket dimension log3/log2

MAX_ENUM_DEPTH = 24
DEFAULT_EXACT_DEPTH = 20
DEFAULT_MC_DEPTH = 10_000
DEFAULT_MC_TRIALS = 200
MC_CHUNK = 25  # fixed reduction chunk so results are thread-count independent


@dataclass(frozen=True)
class ExponentEstimate:
    """A dimension-units growth estimate with its provenance.

    ``upper_bound`` is set when the value itself certifies an upper bound
    (exact fair-coin enumeration, by subadditivity).  ``nu_dim`` accompanies
    beta estimates: the matching estimate s - value of the projected-measure
    dimension.  Richardson-mode values are extrapolations, not bounds.
    """

    value: float
    n: int
    mode: str  # "exact-enumeration" | "monte-carlo" | "richardson"
    stderr: Optional[float] = None
    upper_bound: Optional[float] = None
    nu_dim: Optional[float] = None
    meta: Dict = field(default_factory=dict)


@dataclass(frozen=True)
class GrowthEnvelope:
    """Extreme word growth rates at depth n, with witness words."""

    b_min_est: float
    b_max_est: float
    n: int
    min_word: Tuple[int, ...]
    max_word: Tuple[int, ...]
    min_value: int
    max_value: int


# ---------------------------------------------------------------------------
# Shared tallies of integer product functionals
# ---------------------------------------------------------------------------

_TALLY_CACHE: Dict[Tuple[int, int, int, str], Tuple[np.ndarray, np.ndarray]] = {}


def _check_depth(tp: TransitionPair, n: int, weights_max: int = 1) -> None:
    if n < 1:
        raise ValidationError("depth n must be >= 1")
    if n > MAX_ENUM_DEPTH:
        raise CapacityError(
            f"exact enumeration capped at n={MAX_ENUM_DEPTH}, got {n}"
        )
    if tp.m * 3**n * weights_max >= 2**63:
        raise CapacityError("int64 overflow risk in exact tally")


def tally_cached(tp: TransitionPair, n: int, pv: Optional[PerronVector] = None):
    """(values, counts) of e^T A_w v over all length-n words, cached per slope.

    v is the all-ones vector, or the Perron numerator vector when pv is
    given (values are then numerators over pv.common_denominator).
    """
    kind = "ones" if pv is None else "perron"
    key = (tp.slope.p, tp.slope.q, n, kind)
    if key not in _TALLY_CACHE:
        if pv is None:
            w = np.ones(tp.m, dtype=np.int64)
        else:
            w = np.array(pv.numerators, dtype=np.int64)
        _check_depth(tp, n, int(w.max()))
        _TALLY_CACHE[key] = _kernels.tally_dots(tp.A0, tp.A1, w, n)
    return _TALLY_CACHE[key]


# ---------------------------------------------------------------------------
# alpha: Lebesgue-typical dimension
# ---------------------------------------------------------------------------

def alpha_exact(tp: TransitionPair, n: int = DEFAULT_EXACT_DEPTH) -> ExponentEstimate:
    """a_n = 2^{-n} sum over words of ln(e^T A_w e) / (n ln 2), exact sum.

    A certified upper bound on the limit (n * a_n is subadditive), reported
    as such.
    """
    vals, cnts = tally_cached(tp, n)
    total = float((cnts * np.log(vals.astype(np.float64))).sum())
    a_n = total / (2.0**n * n * LOG2)
    return ExponentEstimate(
        value=a_n, n=n, mode="exact-enumeration", upper_bound=a_n,
        meta={"distinct_values": int(len(vals))},
    )


def alpha_richardson(tp: TransitionPair, n: int = DEFAULT_EXACT_DEPTH // 2) -> ExponentEstimate:
    """Extrapolated 2*a_{2n} - a_n, cancelling the O(1/n) bias; not a bound."""
    a1 = alpha_exact(tp, n).value
    a2 = alpha_exact(tp, 2 * n).value
    return ExponentEstimate(
        value=2 * a2 - a1, n=2 * n, mode="richardson",
        upper_bound=a2, meta={"pair": (n, 2 * n), "raw": (a1, a2)},
    )


def _mc_words(tp: TransitionPair, n: int, trials: int, seed: int,
              eta: bool, pv: Optional[PerronVector], threads: int) -> np.ndarray:
    """Per-trial log functionals, chunked deterministically.

    All randomness is drawn up front from one seeded generator; trials are
    processed in fixed chunks of MC_CHUNK and reassembled in chunk order, so
    the result is identical for every thread count.
    """
    if n < 1 or trials < 1:
        raise ValidationError("n and trials must be >= 1")
    rng = np.random.default_rng(seed)
    A0f = tp.A0.astype(np.float64)
    A1f = tp.A1.astype(np.float64)
    if eta:
        draws = rng.random((trials, n))
    else:
        draws = rng.integers(0, 2, size=(trials, n), dtype=np.uint8)
    chunks = [slice(i, min(i + MC_CHUNK, trials)) for i in range(0, trials, MC_CHUNK)]

    def run(sl: slice) -> np.ndarray:
        if eta:
            _, lv = _kernels.sample_eta_words(A0f, A1f, pv.floats, draws[sl])
        else:
            ones = np.ones(tp.m, dtype=np.float64)
            lv = _kernels.score_words(A0f, A1f, ones, ones, draws[sl])
        return lv

    if threads > 1 and len(chunks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, chunks))
    else:
        parts = [run(sl) for sl in chunks]
    return np.concatenate(parts)


def _mc_estimate(logvals: np.ndarray, n: int, mode_extra: Dict) -> ExponentEstimate:
    vals = logvals / (n * LOG2)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else None
    return ExponentEstimate(
        value=mean, n=n, mode="monte-carlo", stderr=stderr, meta=mode_extra,
    )


def alpha_monte_carlo(tp: TransitionPair, n: int = DEFAULT_MC_DEPTH,
                      trials: int = DEFAULT_MC_TRIALS, seed: int = 0,
                      threads: int = 1) -> ExponentEstimate:
    """Fair-coin Monte Carlo estimate of alpha at depth n.

    Deterministic per seed (fixed chunked reduction order regardless of
    thread count).
    """
    lv = _mc_words(tp, n, trials, seed, eta=False, pv=None, threads=threads)
    return _mc_estimate(lv, n, {"trials": trials, "seed": seed})


# ---------------------------------------------------------------------------
# beta: measure-typical dimension
# ---------------------------------------------------------------------------

def beta_exact(tp: TransitionPair, n: int = DEFAULT_EXACT_DEPTH,
               pv: Optional[PerronVector] = None) -> ExponentEstimate:
    """b_n = sum over words of eta(w) ln(e^T A_w p) / (n ln 2), exact tally.

    Also reports the companion projected-measure dimension s - b_n.
    """
    pv = pv or perron_vector(tp)
    vals, cnts = tally_cached(tp, n, pv)
    D = pv.common_denominator
    # Exact mass check: sum over words of e A_w p == 3^n (catches overflow).
    mass = sum(int(v) * int(c) for v, c in zip(vals, cnts))
    if mass != D * 3**n:
        raise CapacityError("tally mass mismatch; integer overflow in kernel")
    w = vals.astype(np.float64) / D
    eta = cnts.astype(np.float64) * w / 3.0**n
    b_n = float((eta * np.log(w)).sum()) / (n * LOG2)
    return ExponentEstimate(
        value=b_n, n=n, mode="exact-enumeration", nu_dim=S_DIM - b_n,
        meta={"distinct_values": int(len(vals))},
    )


def beta_richardson(tp: TransitionPair, n: int = DEFAULT_EXACT_DEPTH // 2,
                    pv: Optional[PerronVector] = None) -> ExponentEstimate:
    """Extrapolated 2*b_{2n} - b_n; flagged, not a bound."""
    pv = pv or perron_vector(tp)
    b1 = beta_exact(tp, n, pv).value
    b2 = beta_exact(tp, 2 * n, pv).value
    val = 2 * b2 - b1
    return ExponentEstimate(
        value=val, n=2 * n, mode="richardson", nu_dim=S_DIM - val,
        meta={"pair": (n, 2 * n), "raw": (b1, b2)},
    )


def beta_monte_carlo(tp: TransitionPair, n: int = DEFAULT_MC_DEPTH,
                     trials: int = DEFAULT_MC_TRIALS, seed: int = 0,
                     pv: Optional[PerronVector] = None,
                     threads: int = 1) -> ExponentEstimate:
    """Monte Carlo estimate of beta: words sampled from the word measure.

    The per-word functional ln(e^T A_w p)/(n ln 2) has expectation exactly
    b_n under the sampler, so cross-mode agreement at matching n is a pure
    sampling-noise test.
    """
    pv = pv or perron_vector(tp)
    lv = _mc_words(tp, n, trials, seed, eta=True, pv=pv, threads=threads)
    est = _mc_estimate(lv, n, {"trials": trials, "seed": seed})
    return ExponentEstimate(
        value=est.value, n=n, mode="monte-carlo", stderr=est.stderr,
        nu_dim=S_DIM - est.value, meta=est.meta,
    )


# ---------------------------------------------------------------------------
# Envelope
# ---------------------------------------------------------------------------

def growth_envelope(tp: TransitionPair, n: int = DEFAULT_EXACT_DEPTH) -> GrowthEnvelope:
    """Exact min/max of (1/(n ln 2)) ln(e^T A_w e) over all 2^n words.

    The max-rate sequence decreases along n -> 2n (submultiplicativity of
    the max), so the reported b_max_est is a certified upper bound for the
    true top growth rate; symmetrically b_min_est is a lower bound for the
    bottom rate only in the limit sense and overshoots at finite n.
    Witness words are re-evaluated exactly before being reported.
    """
    _check_depth(tp, n)
    mn, mx, wmin, wmax = _kernels.envelope_scan(tp.A0, tp.A1, n)
    for word, val in ((wmin, mn), (wmax, mx)):
        prod = tp.word_product([int(b) for b in word])
        if sum(map(sum, prod)) != val:
            raise InvariantViolation("envelope witness fails re-evaluation")
    return GrowthEnvelope(
        b_min_est=math.log(mn) / (n * LOG2),
        b_max_est=math.log(mx) / (n * LOG2),
        n=n,
        min_word=tuple(int(b) for b in wmin),
        max_word=tuple(int(b) for b in wmax),
        min_value=int(mn),
        max_value=int(mx),
    )
