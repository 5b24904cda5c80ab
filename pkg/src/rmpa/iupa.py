"""Reference IUPA decoding of RM(m, 3) driven by a schedule."""
from __future__ import annotations

import numpy as np

from .allocation.schedule import IupaSchedule
from .fht import first_order_decode
from .fixed_point import divider_tree_average
from .gf2_spaces import Gf2Subspace, coset_table
from .pa_core import (DecoderConfig, _is_fixed, aggregate_average, hard_decision, iterate,
                      minsum_project_1d, pre_aggregate)


def _contribution(l2, j: int, mp: int) -> np.ndarray:
    tab = coset_table(Gf2Subspace(mp, (j,)))
    dec = first_order_decode(minsum_project_1d(l2, tab)).codeword
    return pre_aggregate(l2, dec, tab, j)


def second_order_group_decode(l2, cols, cfg: DecoderConfig, lam: int | None = None) -> np.ndarray:
    """Hard decision of the second-order stage over the given columns.

    Sums are exact except in fixed mode with ``cfg.hw_split`` and a latency
    ``lam``: right-half columns then go through a divider tree ``2**(m-2-l)``
    at a time and are scaled back by a left shift.
    """
    l2 = np.asarray(l2)
    mp = cfg.m - 1
    if l2.shape != (1 << mp,):
        raise ValueError(f"second-order vector must have length {1 << mp}")
    cols = [int(c) for c in cols]
    if not cols or any(not 1 <= c < 1 << mp for c in cols):
        raise ValueError("columns must lie in 1 .. 2**(m-1) - 1")
    fixed = _is_fixed(l2)
    total = np.zeros(l2.shape, dtype=np.int64 if fixed else np.float64)
    half = 1 << (cfg.m - 2)
    chunk = half // lam if lam else 0
    right = [c for c in cols if c >= half]
    if not (fixed and cfg.hw_split and chunk >= 1 and len(right) % chunk == 0):
        for j in cols:
            total += _contribution(l2, j, mp)
        return hard_decision(total)
    for j in cols:
        if j < half:
            total += _contribution(l2, j, mp)
    shift = chunk.bit_length() - 1
    for s in range(0, len(right), chunk):
        part = [_contribution(l2, j, mp) for j in right[s:s + chunk]]
        total += divider_tree_average(part) << shift
    return hard_decision(total)


def iupa_iteration(llr, sched: IupaSchedule, cfg: DecoderConfig) -> np.ndarray:
    m = cfg.m
    lam = sched.lam if sched.kind == "ilp" else None
    row_cols = sched.row_cols()
    contribs = []
    for b in range(1, 1 << (m - 1)):
        tab = coset_table(Gf2Subspace(m, (b,)))
        l2 = minsum_project_1d(llr, tab)
        dec = second_order_group_decode(l2, row_cols[b], cfg, lam)
        contribs.append(pre_aggregate(llr, dec, tab, b))
    # one all-zero dummy completes the power-of-two average
    return aggregate_average(contribs, 1 << (m - 1), fixed=cfg.fixed)


def iupa_decode(llr, sched: IupaSchedule, cfg: DecoderConfig) -> tuple[np.ndarray, int]:
    """IUPA decoding; returns ``(codeword, iterations_used)``."""
    if cfg.r != 3:
        raise ValueError("IUPA is defined for r = 3")
    if sched.m != cfg.m:
        raise ValueError(f"schedule is for m={sched.m}, decoder for m={cfg.m}")
    llr = np.asarray(llr)
    if llr.shape != (1 << cfg.m,):
        raise ValueError(f"expected an LLR vector of length {1 << cfg.m}")
    cw, used, _ = iterate(llr, cfg, lambda cur, c: iupa_iteration(cur, sched, c))
    return cw, used
