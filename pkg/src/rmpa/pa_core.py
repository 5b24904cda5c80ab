"""Projection-aggregation building blocks and the reference IPA decoder.

The functions here operate on one LLR vector at a time and are written for
clarity; they are the reference the vectorised kernels are tested against.
Real-valued LLRs are float arrays; fixed-point LLRs are integer arrays of raw
Q(i:f) values, the format travelling in :class:`DecoderConfig`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .fht import first_order_decode
from .fixed_point import QFormat, divider_tree_average
from .gf2_spaces import CosetTable, Gf2Subspace, coset_table


@dataclass(frozen=True)
class DecoderConfig:
    """Parameters shared by every projection-aggregation decoder.

    ``qformat=None`` selects real arithmetic. ``pus``, ``adder_tree`` and
    ``accumulator`` shape the CPA fixed-point reduction; ``hw_split`` selects
    the adder/divider split of the IUPA second-order combine.
    """

    m: int
    r: int
    n_max: int | None = None
    qformat: QFormat | None = None
    pus: int = 7
    adder_tree: str = "fp"
    accumulator: str = "sat"
    hw_split: bool = False

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.adder_tree not in ("fp", "sat") or self.accumulator not in ("fp", "sat"):
            raise ValueError("adder_tree/accumulator must be 'fp' or 'sat'")
        if self.pus < 1:
            raise ValueError("pus must be positive")

    @property
    def iterations(self) -> int:
        return self.n_max if self.n_max is not None else ceil(self.m / 2)

    @property
    def fixed(self) -> bool:
        return self.qformat is not None


def _is_fixed(llr: np.ndarray) -> bool:
    return llr.dtype.kind in "iu"


def hard_decision(llr) -> np.ndarray:
    """Bit 1 where the LLR is negative; zero decides bit 0."""
    return (np.asarray(llr) < 0).astype(np.uint8)


def minsum_project(llr, table: CosetTable) -> np.ndarray:
    """Min-sum projection onto the cosets of ``table`` (any dimension)."""
    llr = np.asarray(llr)
    if llr.shape[-1] != 1 << table.m:
        raise ValueError(f"LLR length {llr.shape[-1]} != 2**{table.m}")
    vals = llr[..., table.members]
    mag = np.abs(vals).min(axis=-1)
    neg = (vals < 0).sum(axis=-1) & 1
    return np.where(neg == 1, -mag, mag)


def minsum_project_1d(llr, table: CosetTable) -> np.ndarray:
    """Min-sum projection onto the cosets of a one-dimensional subspace."""
    if table.subspace.d != 1:
        raise ValueError("expected a one-dimensional subspace table")
    return minsum_project(llr, table)


def pre_aggregate(llr, decoded, table: CosetTable, shift: int) -> np.ndarray:
    """``L_agg(z) = (1 - 2 c[coset(z)]) * L(z ^ shift)``.

    On integer input the sign flip is an exact negation (two's complement).
    """
    llr = np.asarray(llr)
    decoded = np.asarray(decoded, dtype=np.uint8)
    n = 1 << table.m
    if llr.shape[-1] != n or decoded.shape[-1] != table.n_cosets:
        raise ValueError("dimension mismatch between LLRs, decisions and table")
    z = np.arange(n)
    flip = decoded[..., table.coset_of].astype(bool)
    moved = llr[..., z ^ shift]
    return np.where(flip, -moved, moved)


def aggregate_average(vectors, count: int | None = None, fixed: bool | None = None) -> np.ndarray:
    """Average of ``vectors`` padded with all-zero vectors up to ``count`` entries.

    Real mode divides the exact sum by ``count``. Fixed mode pads to the next
    power of two and runs the divider tree.
    """
    vecs = np.asarray(vectors)
    if vecs.ndim < 2 or vecs.shape[0] == 0:
        raise ValueError("need at least one vector to aggregate")
    count = vecs.shape[0] if count is None else count
    if count < vecs.shape[0]:
        raise ValueError("count smaller than the number of vectors")
    fixed = _is_fixed(vecs) if fixed is None else fixed
    if not fixed:
        return vecs.sum(axis=0) / count
    width = 1 << (count - 1).bit_length()
    pad = np.zeros((width - vecs.shape[0],) + vecs.shape[1:], dtype=np.int64)
    return divider_tree_average(np.concatenate([vecs.astype(np.int64), pad]))


def converged(new, old) -> bool:
    """Stopping rule: exact equality for fixed point, equal signs for reals."""
    new = np.asarray(new)
    if _is_fixed(new):
        return bool(np.array_equal(new, old))
    return bool(np.array_equal(hard_decision(new), hard_decision(old)))


def handoff(values, cfg: DecoderConfig) -> np.ndarray:
    """Clamp an aggregated fixed-point vector back into the LLR register range."""
    if not cfg.fixed:
        return values
    return np.clip(values, cfg.qformat.raw_min, cfg.qformat.raw_max).astype(np.int64)


def second_order_sweep(l2, cfg: DecoderConfig | None = None, cols=None) -> np.ndarray:
    """One pass of second-order projection-aggregation; returns the hard decision.

    Only the sign of the aggregate is used, so the contributions are summed.
    ``cols`` restricts the one-dimensional projections (default: all).
    """
    l2 = np.asarray(l2)
    mp = l2.shape[-1].bit_length() - 1
    cols = range(1, 1 << mp) if cols is None else cols
    total = np.zeros(l2.shape, dtype=np.int64 if _is_fixed(l2) else np.float64)
    for j in cols:
        tab = coset_table(Gf2Subspace(mp, (int(j),)))
        dec = first_order_decode(minsum_project_1d(l2, tab)).codeword
        total += pre_aggregate(l2, dec, tab, int(j))
    return hard_decision(total)


def ipa_iteration(llr, cfg: DecoderConfig) -> np.ndarray:
    """One outer IPA iteration; returns the aggregated estimate."""
    m = cfg.m
    contribs = []
    for i in range(1, 1 << m):
        tab = coset_table(Gf2Subspace(m, (i,)))
        proj = minsum_project_1d(llr, tab)
        if cfg.r == 2:
            dec = first_order_decode(proj).codeword
        else:
            dec = second_order_sweep(proj, cfg)
        contribs.append(pre_aggregate(llr, dec, tab, i))
    return aggregate_average(contribs, (1 << m) - 1, fixed=cfg.fixed)


def iterate(llr, cfg: DecoderConfig, step) -> tuple[np.ndarray, int, np.ndarray]:
    """Run ``step`` until the stopping rule holds or ``n_max`` is reached.

    Returns ``(codeword, iterations_used, final_estimate)``.
    """
    cur = np.asarray(llr)
    est = cur
    used = 0
    for used in range(1, cfg.iterations + 1):
        est = step(cur, cfg)
        nxt = handoff(est, cfg)
        if converged(nxt, cur):
            break
        cur = nxt
    return hard_decision(est), used, est


def ipa_decode(llr, cfg: DecoderConfig) -> tuple[np.ndarray, int]:
    """Iterative projection-aggregation decoding of RM(m, 2) or RM(m, 3)."""
    if cfg.r not in (2, 3):
        raise ValueError(f"IPA supports r in {{2, 3}}, got r={cfg.r}")
    llr = np.asarray(llr)
    if llr.shape != (1 << cfg.m,):
        raise ValueError(f"expected an LLR vector of length {1 << cfg.m}")
    cw, used, _ = iterate(llr, cfg, ipa_iteration)
    return cw, used
