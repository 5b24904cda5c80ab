"""Fast Hadamard transform and ML decoding of first-order RM codes from LLRs.

LLR convention throughout the package: positive means bit 0 is more likely.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def _log2_length(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    return n.bit_length() - 1


def fht(v) -> np.ndarray:
    """Walsh-Hadamard transform ``W(k) = sum_z (-1)^<k,z> v(z)`` along the last axis.

    Integer input stays integer (exact, widened to int64); no normalisation.
    """
    v = np.asarray(v)
    mp = _log2_length(v.shape[-1])
    w = v.astype(np.int64 if v.dtype.kind in "iub" else np.float64, copy=True)
    lead = w.shape[:-1]
    n = w.shape[-1]
    for s in range(mp):
        h = 1 << s
        w = w.reshape(*lead, n // (2 * h), 2, h)
        a = w[..., 0, :]
        b = w[..., 1, :]
        w = np.stack((a + b, a - b), axis=-2)
    return w.reshape(*lead, n)


@lru_cache(maxsize=None)
def first_order_codebook(mp: int) -> np.ndarray:
    """``(2**mp, 2**mp)`` table of linear codewords: row k is ``<k, z>`` over z."""
    z = np.arange(1 << mp)
    anded = z[:, None] & z[None, :]
    par = np.zeros_like(anded)
    for b in range(mp):
        par ^= (anded >> b) & 1
    tab = par.astype(np.uint8)
    tab.setflags(write=False)
    return tab


@dataclass(frozen=True)
class FhtResult:
    codeword: np.ndarray
    best_index: int
    complemented: bool
    metric: float


def fod_batch(llr) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised first-order decoding along the last axis.

    Returns ``(bits, best_index, complemented)``. Ties go to the smallest
    transform index, then to the non-complemented codeword.
    """
    llr = np.asarray(llr)
    mp = _log2_length(llr.shape[-1])
    w = fht(llr)
    kstar = np.abs(w).argmax(axis=-1)
    wk = np.take_along_axis(w, kstar[..., None], axis=-1)[..., 0]
    comp = wk < 0
    bits = first_order_codebook(mp)[kstar] ^ comp[..., None].astype(np.uint8)
    return bits, kstar, comp


def first_order_decode(llr) -> FhtResult:
    """Maximum-likelihood RM(m', 1) decoding of a single LLR vector."""
    llr = np.asarray(llr)
    if llr.ndim != 1:
        raise ValueError("expected a single LLR vector")
    bits, k, comp = fod_batch(llr)
    w = fht(llr)
    return FhtResult(bits, int(k), bool(comp), abs(w[int(k)]).item())
