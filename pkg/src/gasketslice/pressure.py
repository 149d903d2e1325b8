"""Pressure function, its derivative, and the Legendre-transform spectra.

The finite-depth pressure

    P_n(t) = (1/n) ln sum over words |w|=n of (e^T A_w e)^t

is convex and increasing in t with P_n(0) = ln 2 exactly.  Submultiplicativity
of e^T A_w e makes n P_n(t) subadditive for t >= 0 and superadditive for
t < 0, so raw P_n values are certified upper (t >= 0) or lower (t < 0)
bounds for the limit P(t), monotone along n -> 2n.

Raw P_n carries an O(1/n) bias (at t = 1 it equals ln 3 + ln(m)/n exactly),
which no affordable depth beats.  The derivative and all Legendre-transform
spectra therefore run on the Richardson combination

    Phat(t) = 2 P_{2n}(t) - P_n(t),

which cancels the 1/n term (exact at t = 0 and t = 1) at the price of no
longer being a one-sided bound; outputs built on it are flagged
"extrapolated" rather than "upper"/"lower".

Spectra, all in dimension units (natural-log pressure divided by ln 2):

* gamma(delta): dimension of offsets whose slice dimension is >= delta.
  Equal to 1 for delta up to the typical dimension alpha, then the
  decreasing Legendre transform inf_{t>0} {-delta t + Phat(t)/ln 2},
  clipped at 0 (with a flag) past where the transform goes negative.
* chi(delta): same transform without the clip, on [alpha, b_max].
* box spectrum: inf over all real t (both branches); concave by
  construction.  Values may go negative near the domain endpoints because
  the finite-depth envelope overshoots the true growth extremes; they are
  reported as-is with range flags rather than clipped.
* local-dimension spectrum: the box spectrum reflected through s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError
from .exponents import (
    DEFAULT_EXACT_DEPTH,
    S_DIM,
    GrowthEnvelope,
    growth_envelope,
    tally_cached,
)
from .matrices import TransitionPair
from .measures import LOG2

__all__ = [
    "PressureCurve",
    "SpectrumCurve",
    "DEFAULT_PAIR",
    "T_MAX",
    "pressure_at",
    "pressure_extrapolated",
    "pressure_derivative",
    "alpha_splice",
    "legendre_gamma",
    "spectrum_box",
    "spectrum_localdim",
    "spectrum_curve",
    "pressure_curve",
]

DEFAULT_PAIR = (11, 22)
T_MAX = 40.0
_SPLICE_T = 2e-3  # where "P'(0+)" is evaluated; curvature error is O(t)
_EXACT_INT_T_MAX = 8  # integer t up to this gets the big-integer sum path


# ---------------------------------------------------------------------------
# Raw finite-depth pressure
# ---------------------------------------------------------------------------

def pressure_at(tp: TransitionPair, t: float, n: int = DEFAULT_EXACT_DEPTH
                ) -> Tuple[float, str]:
    """P_n(t) with its bound kind: "upper" for t >= 0, "lower" for t < 0.

    Small nonnegative integer t is summed in exact big integers (so the
    anchors P_n(0) = ln 2 and P_n(1) = ln 3 + ln(m)/n hold to the last bit);
    everything else goes through a max-shifted log-sum-exp over the tallied
    distinct values.
    """
    vals, cnts = tally_cached(tp, n)
    t = float(t)
    if t.is_integer() and 0 <= t <= _EXACT_INT_T_MAX:
        ti = int(t)
        total = sum(int(c) * int(v) ** ti for v, c in zip(vals, cnts))
        value = math.log(total) / n
    else:
        x = t * np.log(vals.astype(np.float64)) + np.log(cnts.astype(np.float64))
        m = float(x.max())
        value = (m + math.log(float(np.exp(x - m).sum()))) / n
    return value, ("upper" if t >= 0 else "lower")


def pressure_extrapolated(tp: TransitionPair, t: float,
                          pair: Tuple[int, int] = DEFAULT_PAIR) -> float:
    """Richardson combination 2 P_{2n}(t) - P_n(t); a point estimate, not a bound."""
    n1, n2 = pair
    if n2 != 2 * n1:
        raise ValidationError(f"extrapolation pair must be (n, 2n), got {pair}")
    return 2.0 * pressure_at(tp, t, n2)[0] - pressure_at(tp, t, n1)[0]


def pressure_derivative(tp: TransitionPair, t: float,
                        pair: Tuple[int, int] = DEFAULT_PAIR,
                        h: float = 1e-3) -> float:
    """dP/dt at t > 0 (natural-log units) from extrapolated pressure.

    Central differences with one Richardson level in the step size; the step
    shrinks near 0 so the stencil stays in the differentiable range t > 0.
    """
    if t <= 0:
        raise ValidationError("pressure derivative is only defined for t > 0")
    h = min(h, t / 2)

    def central(hh: float) -> float:
        return (
            pressure_extrapolated(tp, t + hh, pair)
            - pressure_extrapolated(tp, t - hh, pair)
        ) / (2 * hh)

    d_h = central(h)
    d_h2 = central(h / 2)
    return (4 * d_h2 - d_h) / 3


# ---------------------------------------------------------------------------
# Cached machinery for Legendre transforms
# ---------------------------------------------------------------------------

_GRID_CACHE: Dict[Tuple[int, int, Tuple[int, int]], Tuple[np.ndarray, np.ndarray]] = {}
_SPLICE_CACHE: Dict[Tuple[int, int, Tuple[int, int]], float] = {}
_ENV_CACHE: Dict[Tuple[int, int, int], GrowthEnvelope] = {}


def _t_grid() -> np.ndarray:
    pos = np.concatenate([np.geomspace(1e-4, 1.0, 60), np.linspace(1.05, T_MAX, 160)])
    return np.concatenate([-pos[::-1], [0.0], pos])


def _grid_values(tp: TransitionPair, pair: Tuple[int, int]):
    key = (tp.slope.p, tp.slope.q, pair)
    if key not in _GRID_CACHE:
        ts = _t_grid()
        ps = np.array([pressure_extrapolated(tp, float(t), pair) for t in ts])
        _GRID_CACHE[key] = (ts, ps)
    return _GRID_CACHE[key]


def alpha_splice(tp: TransitionPair, pair: Tuple[int, int] = DEFAULT_PAIR) -> float:
    """The splice point for gamma: P'(0+)/ln 2 from extrapolated pressure."""
    key = (tp.slope.p, tp.slope.q, pair)
    if key not in _SPLICE_CACHE:
        _SPLICE_CACHE[key] = pressure_derivative(tp, _SPLICE_T, pair) / LOG2
    return _SPLICE_CACHE[key]


def envelope_cached(tp: TransitionPair, n: int = DEFAULT_EXACT_DEPTH) -> GrowthEnvelope:
    key = (tp.slope.p, tp.slope.q, n)
    if key not in _ENV_CACHE:
        _ENV_CACHE[key] = growth_envelope(tp, n)
    return _ENV_CACHE[key]


def _refine_min(tp, pair, delta, ts, gs, i) -> Tuple[float, float]:
    """Golden-section refinement of g(t) = -delta t + Phat(t)/ln2 around grid min."""
    lo = float(ts[max(i - 1, 0)])
    hi = float(ts[min(i + 1, len(ts) - 1)])
    if lo == hi:
        return float(gs[i]), float(ts[i])

    def g(t: float) -> float:
        return -delta * t + pressure_extrapolated(tp, t, pair) / LOG2

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = g(c), g(d)
    for _ in range(40):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = g(d)
    t_star = (a + b) / 2
    return min(float(gs[i]), g(t_star)), t_star


def _legendre(tp: TransitionPair, delta: float, pair: Tuple[int, int],
              positive_branch_only: bool) -> Tuple[float, float]:
    """(inf value, minimizing t) of -delta t + Phat(t)/ln2 on the cached grid."""
    ts, ps = _grid_values(tp, pair)
    if positive_branch_only:
        mask = ts > 0
        ts, ps = ts[mask], ps[mask]
    gs = -delta * ts + ps / LOG2
    i = int(np.argmin(gs))
    return _refine_min(tp, pair, delta, ts, gs, i)


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LegendreValue:
    """A spectrum value with its minimizer and range diagnostics."""

    value: float
    t_star: Optional[float]
    in_range: bool
    clipped: bool = False


def legendre_gamma(tp: TransitionPair, delta: float,
                   pair: Tuple[int, int] = DEFAULT_PAIR,
                   env_depth: int = DEFAULT_EXACT_DEPTH,
                   detail: bool = False):
    """gamma(delta): dimension of offsets with slice dimension >= delta.

    1 on [0, alpha], then the decreasing transform inf_{t>0}, clipped at 0
    near the top end of the envelope (the finite-depth b_max estimate
    overshoots, so the raw transform dives negative there).
    """
    if delta < 0:
        raise ValidationError("delta must be >= 0")
    a_spl = alpha_splice(tp, pair)
    env = envelope_cached(tp, env_depth)
    if delta > env.b_max_est:
        out = LegendreValue(0.0, None, in_range=False, clipped=True)
        return out if detail else out.value
    if delta <= a_spl:
        out = LegendreValue(1.0, None, in_range=True)
        return out if detail else out.value
    val, t_star = _legendre(tp, delta, pair, positive_branch_only=True)
    out = LegendreValue(max(val, 0.0), t_star, in_range=True, clipped=(val < 0))
    return out if detail else out.value


def legendre_chi(tp: TransitionPair, delta: float,
                 pair: Tuple[int, int] = DEFAULT_PAIR,
                 detail: bool = False):
    """chi(delta): the inf_{t>0} transform with no splice and no clipping."""
    val, t_star = _legendre(tp, delta, pair, positive_branch_only=True)
    out = LegendreValue(val, t_star, in_range=True)
    return out if detail else out.value


def spectrum_box(tp: TransitionPair, alpha_prime: float,
                 pair: Tuple[int, int] = DEFAULT_PAIR,
                 env_depth: int = DEFAULT_EXACT_DEPTH,
                 detail: bool = False):
    """Dimension of offsets whose slice has box dimension alpha_prime.

    The infimum runs over both t branches; values are reported unclipped so
    discrete concavity holds exactly, with in_range=False flagging arguments
    outside the finite-depth envelope.
    """
    env = envelope_cached(tp, env_depth)
    in_range = env.b_min_est <= alpha_prime <= env.b_max_est
    val, t_star = _legendre(tp, alpha_prime, pair, positive_branch_only=False)
    out = LegendreValue(val, t_star, in_range=in_range)
    return out if detail else out.value


def spectrum_localdim(tp: TransitionPair, alpha_prime: float,
                      pair: Tuple[int, int] = DEFAULT_PAIR,
                      env_depth: int = DEFAULT_EXACT_DEPTH,
                      detail: bool = False):
    """Local-dimension spectrum of the projected measure: exact reflection.

    spectrum_localdim(a) = spectrum_box(s - a), evaluated as such.
    """
    return spectrum_box(tp, S_DIM - alpha_prime, pair, env_depth, detail)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PressureCurve:
    """Sampled t -> P_n(t) with bound kinds; s is carried for convenience."""

    samples: Tuple[Tuple[float, float, str, int], ...]  # (t, P, bound_kind, n)
    s: float = S_DIM

    def rows(self) -> List[Tuple]:
        return [(t, p, kind, n) for (t, p, kind, n) in self.samples]


@dataclass(frozen=True)
class SpectrumCurve:
    """A sampled spectrum with endpoint metadata for plotting."""

    kind: str  # "gamma" | "chi" | "box" | "localdim"
    points: Tuple[Tuple[float, float], ...]
    endpoints: Tuple[float, float]
    meta: Dict = field(default_factory=dict)

    def rows(self) -> List[Tuple]:
        return [(x, y) for (x, y) in self.points]


def pressure_curve(tp: TransitionPair, t_values: Sequence[float],
                   n: int = DEFAULT_EXACT_DEPTH) -> PressureCurve:
    samples = []
    for t in t_values:
        val, kind = pressure_at(tp, float(t), n)
        samples.append((float(t), val, kind, n))
    return PressureCurve(tuple(samples))


_SPECTRUM_KINDS = ("gamma", "chi", "box", "localdim")


def spectrum_curve(tp: TransitionPair, kind: str,
                   grid: Optional[Sequence[float]] = None,
                   points: int = 50,
                   pair: Tuple[int, int] = DEFAULT_PAIR,
                   env_depth: int = DEFAULT_EXACT_DEPTH) -> SpectrumCurve:
    """Evaluate one spectrum on a grid (a default grid spans its domain)."""
    if kind not in _SPECTRUM_KINDS:
        raise ValidationError(f"unknown spectrum kind {kind!r}; pick from {_SPECTRUM_KINDS}")
    env = envelope_cached(tp, env_depth)
    a_spl = alpha_splice(tp, pair)
    if grid is None:
        domains = {
            "gamma": (0.0, env.b_max_est),
            "chi": (a_spl, env.b_max_est),
            "box": (env.b_min_est, env.b_max_est),
            "localdim": (S_DIM - env.b_max_est, S_DIM - env.b_min_est),
        }
        lo, hi = domains[kind]
        grid = np.linspace(lo, hi, points)
    fns = {
        "gamma": lambda d: legendre_gamma(tp, d, pair, env_depth),
        "chi": lambda d: legendre_chi(tp, d, pair),
        "box": lambda d: spectrum_box(tp, d, pair, env_depth),
        "localdim": lambda d: spectrum_localdim(tp, d, pair, env_depth),
    }
    fn = fns[kind]
    pts = tuple((float(x), float(fn(float(x)))) for x in grid)
    if kind == "localdim":
        endpoints = (S_DIM - env.b_max_est, S_DIM - env.b_min_est)
    else:
        endpoints = (env.b_min_est, env.b_max_est)
    return SpectrumCurve(
        kind=kind,
        points=pts,
        endpoints=endpoints,
        meta={
            "alpha_splice": a_spl,
            "pair": pair,
            "env_depth": env_depth,
            "b_min_est": env.b_min_est,
            "b_max_est": env.b_max_est,
            "bound_kind": "extrapolated",
        },
    )
