"""Collapsed projection-aggregation (CPA) decoding.

The received vector is projected directly onto every (r-1)-dimensional
subspace; pre-aggregation is the leave-one-out min-sum of each coset, built
from the coset's first and second minimum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fht import first_order_decode
from .fixed_point import adder_tree_sum, sat_add
from .gf2_spaces import CosetTable, coset_table, enumerate_subspaces
from .pa_core import DecoderConfig, converged, hard_decision


@dataclass(frozen=True)
class CosetMinStats:
    """Per-coset arrays: first/second smallest magnitude, argmin coordinate, sign product."""

    fmin: np.ndarray
    smin: np.ndarray
    argmin: np.ndarray
    total_sign: np.ndarray  # +1 / -1


def coset_min_stats(llr, table: CosetTable) -> CosetMinStats:
    llr = np.asarray(llr)
    if table.coset_size < 2:
        raise ValueError("cosets need at least two members")
    if llr.shape[-1] != 1 << table.m:
        raise ValueError("LLR length does not match the table")
    mags = np.abs(llr[table.members])
    # stable sort keeps the smaller coordinate first among equal magnitudes
    order = np.argsort(mags, axis=1, kind="stable")
    rows = np.arange(table.n_cosets)
    fmin = mags[rows, order[:, 0]]
    smin = mags[rows, order[:, 1]]
    argmin = table.members[rows, order[:, 0]]
    neg = (llr[table.members] < 0).sum(axis=1) & 1
    return CosetMinStats(fmin, smin, argmin, np.where(neg == 1, -1, 1))


def cpa_project(stats: CosetMinStats) -> np.ndarray:
    return stats.total_sign * stats.fmin


def cpa_pre_aggregate(llr, stats: CosetMinStats, decoded, table: CosetTable) -> np.ndarray:
    """Leave-one-out min-sum of each coset, sign-flipped by the decoded bit."""
    llr = np.asarray(llr)
    decoded = np.asarray(decoded, dtype=np.uint8)
    if llr.shape[-1] != 1 << table.m or decoded.shape[-1] != table.n_cosets:
        raise ValueError("dimension mismatch between LLRs, decisions and table")
    z = np.arange(1 << table.m)
    c = table.coset_of
    mag = np.where(stats.argmin[c] == z, stats.smin[c], stats.fmin[c])
    own = np.where(llr < 0, -1, 1)
    sign = stats.total_sign[c] * own * (1 - 2 * decoded[c].astype(np.int64))
    return sign * mag


def cpa_subspaces(m: int, r: int):
    return enumerate_subspaces(m, r - 1)


def _reduce_fixed(contribs: np.ndarray, cfg: DecoderConfig) -> np.ndarray:
    """Adder tree over ``cfg.pus`` contributions per cycle, then the accumulator."""
    q = cfg.qformat
    p = cfg.pus
    tree_bound = 1 << (q.total_bits - 1) if cfg.adder_tree == "sat" else None
    if cfg.accumulator == "sat":
        if cfg.adder_tree == "sat":
            acc_bound = 1 << (q.total_bits - 1)
        else:
            acc_bound = 1 << (q.total_bits - 1 + (p - 1).bit_length())
    else:
        acc_bound = None
    acc = np.zeros(contribs.shape[1], dtype=np.int64)
    for start in range(0, contribs.shape[0], p):
        chunk = adder_tree_sum(contribs[start:start + p], bound=tree_bound)
        acc = acc + chunk if acc_bound is None else sat_add(acc, chunk, acc_bound)
    return acc


def cpa_iteration(llr, cfg: DecoderConfig) -> np.ndarray:
    """One CPA iteration; returns the sum (fixed) or average (real) of contributions."""
    contribs = []
    for sub in cpa_subspaces(cfg.m, cfg.r):
        tab = coset_table(sub)
        stats = coset_min_stats(llr, tab)
        dec = first_order_decode(cpa_project(stats)).codeword
        contribs.append(cpa_pre_aggregate(llr, stats, dec, tab))
    contribs = np.asarray(contribs)
    if cfg.fixed:
        return _reduce_fixed(contribs, cfg)
    return contribs.sum(axis=0) / len(contribs)


def cpa_handoff(est, cfg: DecoderConfig) -> np.ndarray:
    """Next-iteration input: fixed-point sums saturate to ``+-2**(q-1)`` raw."""
    if not cfg.fixed:
        return est
    bound = 1 << (cfg.qformat.total_bits - 1)
    return np.clip(est, -bound, bound)


def cpa_decode(llr, cfg: DecoderConfig) -> tuple[np.ndarray, int]:
    """Collapsed projection-aggregation decoding of RM(m, r), r >= 2."""
    if cfg.r < 2 or cfg.r > cfg.m:
        raise ValueError(f"CPA needs 2 <= r <= m, got r={cfg.r}")
    cur = np.asarray(llr)
    if cur.shape != (1 << cfg.m,):
        raise ValueError(f"expected an LLR vector of length {1 << cfg.m}")
    est = cur
    used = 0
    for used in range(1, cfg.iterations + 1):
        est = cpa_iteration(cur, cfg)
        nxt = cpa_handoff(est, cfg)
        if converged(nxt, cur):
            break
        cur = nxt
    return hard_decision(est), used
