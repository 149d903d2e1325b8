"""NumPy reference implementations of the enumeration/sampling kernels.

Same contracts as the compiled ``_fast`` module.  Enumeration kernels walk
the binary word tree sharing prefixes: the leading levels by explicit
recursion, the trailing ``block_levels`` by array doubling, so memory stays
bounded by ``2**block_levels`` rows.

Conventions shared by both backends:

* words are binary arrays, first letter first; products extend on the right
  (appending letter b maps the running row vector u to u @ A_b);
* integer kernels are exact in int64 (callers guard against overflow);
* float kernels renormalise the running vectors to unit 1-norm every step
  and accumulate the log scale, so chain length is unbounded.
"""
from __future__ import annotations

from typing import Tuple

import numpy as np

BLOCK_LEVELS = 14


def _merge_tallies(vals_list, cnts_list) -> Tuple[np.ndarray, np.ndarray]:
    vals = np.concatenate(vals_list)
    cnts = np.concatenate(cnts_list)
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    cnts = cnts[order]
    edge = np.empty(len(vals), dtype=bool)
    edge[0] = True
    np.not_equal(vals[1:], vals[:-1], out=edge[1:])
    starts = np.flatnonzero(edge)
    uvals = vals[starts]
    ucnts = np.add.reduceat(cnts, starts)
    return uvals, ucnts


def tally_dots(A0: np.ndarray, A1: np.ndarray, weights: np.ndarray, n: int,
               block_levels: int = BLOCK_LEVELS) -> Tuple[np.ndarray, np.ndarray]:
    """Multiset of e^T A_{w_1}..A_{w_n} weights over all 2^n binary words.

    Returns (values, counts) as int64 arrays sorted by value; sum(counts)
    equals 2^n.  Exact integer arithmetic throughout.
    """
    A = (np.ascontiguousarray(A0, dtype=np.int64),
         np.ascontiguousarray(A1, dtype=np.int64))
    w = np.ascontiguousarray(weights, dtype=np.int64)
    m = A[0].shape[0]
    tail = min(n, block_levels)
    lead = n - tail
    vals_list = []
    cnts_list = []

    def block(u: np.ndarray) -> None:
        U = u[None, :]
        for _ in range(tail):
            U = np.concatenate([U @ A[0], U @ A[1]])
        v, c = np.unique(U @ w, return_counts=True)
        vals_list.append(v)
        cnts_list.append(c.astype(np.int64))

    def descend(u: np.ndarray, depth: int) -> None:
        if depth == lead:
            block(u)
            return
        descend(u @ A[0], depth + 1)
        descend(u @ A[1], depth + 1)

    descend(np.ones(m, dtype=np.int64), 0)
    return _merge_tallies(vals_list, cnts_list)


def _bitrev(i: int, t: int) -> int:
    return sum(((i >> s) & 1) << (t - 1 - s) for s in range(t))


def envelope_scan(A0: np.ndarray, A1: np.ndarray, n: int,
                  block_levels: int = BLOCK_LEVELS):
    """Extremes of e^T A_w e over all words of length n, with witness words.

    Returns (min_val, max_val, min_word, max_word); words are uint8 arrays of
    length n, first letter first.  Ties resolve to the lexicographically
    smallest word (the traversal is in lexicographic order and strict
    comparisons keep the first witness).
    """
    A = (np.ascontiguousarray(A0, dtype=np.int64),
         np.ascontiguousarray(A1, dtype=np.int64))
    m = A[0].shape[0]
    tail = min(n, block_levels)
    lead = n - tail
    best = {"min": None, "max": None, "min_word": None, "max_word": None}

    def block(u: np.ndarray, prefix: Tuple[int, ...]) -> None:
        U = u[None, :]
        for _ in range(tail):
            U = np.concatenate([U @ A[0], U @ A[1]])
        sums = U @ np.ones(m, dtype=np.int64)
        # Each doubling stacks letter-0 rows first, so the letter appended at
        # tail step s is bit s of the final row index (LSB = first tail letter).
        # Lexicographic word order therefore means bit-reversed index order,
        # which is how ties are broken (matching the compiled DFS).
        for kind in ("min", "max"):
            val = int(sums.min() if kind == "min" else sums.max())
            better = best[kind] is None or (val < best[kind] if kind == "min" else val > best[kind])
            if better:
                idxs = np.flatnonzero(sums == val)
                idx = min((int(i) for i in idxs), key=lambda i: _bitrev(i, tail))
                tail_bits = tuple((idx >> s) & 1 for s in range(tail))
                best[kind] = val
                best[f"{kind}_word"] = prefix + tail_bits

    def descend(u: np.ndarray, depth: int, prefix: Tuple[int, ...]) -> None:
        if depth == lead:
            block(u, prefix)
            return
        descend(u @ A[0], depth + 1, prefix + (0,))
        descend(u @ A[1], depth + 1, prefix + (1,))

    descend(np.ones(m, dtype=np.int64), 0, ())
    return (
        best["min"],
        best["max"],
        np.array(best["min_word"], dtype=np.uint8),
        np.array(best["max_word"], dtype=np.uint8),
    )


def score_words(A0: np.ndarray, A1: np.ndarray, left: np.ndarray,
                right: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """ln(left^T A_w right) for each word (row) in bits; -inf for exact zeros."""
    Af = (np.ascontiguousarray(A0, dtype=np.float64),
          np.ascontiguousarray(A1, dtype=np.float64))
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    trials, n = bits.shape
    U = np.tile(np.asarray(left, dtype=np.float64), (trials, 1))
    acc = np.zeros(trials, dtype=np.float64)
    alive = np.ones(trials, dtype=bool)
    for k in range(n):
        b = bits[:, k]
        V = np.empty_like(U)
        m0 = b == 0
        V[m0] = U[m0] @ Af[0]
        V[~m0] = U[~m0] @ Af[1]
        s = V.sum(axis=1)
        dead = alive & (s == 0.0)
        if dead.any():
            acc[dead] = -np.inf
            alive &= ~dead
            s[~alive] = 1.0
        acc[alive] += np.log(s[alive])
        U = V / s[:, None]
    fin = U @ np.asarray(right, dtype=np.float64)
    zero = alive & (fin == 0.0)
    acc[zero] = -np.inf
    ok = alive & ~zero
    acc[ok] += np.log(fin[ok])
    return acc


def sample_eta_words(A0: np.ndarray, A1: np.ndarray, p: np.ndarray,
                     uniforms: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Sample words from the stationary word measure, scoring as it goes.

    uniforms has shape (trials, n).  Letter k of each chain is 0 when the
    uniform is below (u A_0 p) / (u (A0+A1) p) for that chain's running
    vector u.  Returns (bits, logvals) with logvals[i] = ln(e^T A_w p) for
    chain i's word.
    """
    Af = (np.ascontiguousarray(A0, dtype=np.float64),
          np.ascontiguousarray(A1, dtype=np.float64))
    pf = np.asarray(p, dtype=np.float64)
    uniforms = np.asarray(uniforms, dtype=np.float64)
    trials, n = uniforms.shape
    m = Af[0].shape[0]
    U = np.ones((trials, m), dtype=np.float64)
    acc = np.zeros(trials, dtype=np.float64)
    bits = np.empty((trials, n), dtype=np.uint8)
    for k in range(n):
        V0 = U @ Af[0]
        V1 = U @ Af[1]
        w0 = V0 @ pf
        w1 = V1 @ pf
        p0 = w0 / (w0 + w1)
        b = (uniforms[:, k] >= p0).astype(np.uint8)
        bits[:, k] = b
        m1 = b.astype(bool)
        V = np.where(m1[:, None], V1, V0)
        s = V.sum(axis=1)
        acc += np.log(s)
        U = V / s[:, None]
    acc += np.log(U @ pf)
    return bits, acc
