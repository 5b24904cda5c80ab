"""Reed-Muller code construction, encoding, membership and binary projection."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .gf2_spaces import CosetTable


def _plotkin(m: int, r: int) -> np.ndarray:
    if r == 0:
        return np.ones((1, 1 << m), dtype=np.uint8)
    if m == 1:
        return np.array([[1, 1], [0, 1]], dtype=np.uint8)
    top = _plotkin(m - 1, min(r, m - 1))
    bottom = _plotkin(m - 1, r - 1)
    return np.block([[top, top], [np.zeros_like(bottom), bottom]])


@lru_cache(maxsize=None)
def _generator_cached(m: int, r: int) -> np.ndarray:
    g = _plotkin(m, r)
    g.setflags(write=False)
    return g


def generator_matrix(m: int, r: int) -> np.ndarray:
    """``k x 2**m`` generator of RM(m, r) built by the Plotkin recursion.

    Rows follow the recursion literally: the ``[G(m-1,r) | G(m-1,r)]`` block
    first, then ``[0 | G(m-1,r-1)]``.
    """
    if m < 1:
        raise ValueError(f"m={m} must be positive")
    if not 0 <= r <= m:
        raise ValueError(f"order r={r} outside [0, {m}]")
    return _generator_cached(m, r)


def gf2_rank(mat: np.ndarray) -> int:
    """Rank over F_2 of a binary matrix."""
    rows = [int("".join(map(str, row[::-1])), 2) if len(row) else 0
            for row in np.asarray(mat, dtype=np.uint8)]
    pivots: dict[int, int] = {}
    rank = 0
    for v in rows:
        while v:
            lead = v.bit_length() - 1
            if lead not in pivots:
                pivots[lead] = v
                rank += 1
                break
            v ^= pivots[lead]
    return rank


@dataclass(frozen=True)
class RmCode:
    """The Reed-Muller code RM(m, r) of length ``2**m``."""

    m: int
    r: int
    generator: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "generator", generator_matrix(self.m, self.r))

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def k(self) -> int:
        return sum(comb(self.m, i) for i in range(self.r + 1))

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def min_distance(self) -> int:
        return 1 << (self.m - self.r)


def encode(code: RmCode, u) -> np.ndarray:
    """Codeword(s) ``u G`` over F_2; ``u`` may be a batch of shape ``(..., k)``."""
    u = np.asarray(u, dtype=np.int64)
    if u.shape[-1] != code.k:
        raise ValueError(f"message length {u.shape[-1]} != k={code.k}")
    return ((u @ code.generator.astype(np.int64)) & 1).astype(np.uint8)


def is_codeword(code: RmCode, c) -> bool:
    """True iff ``c`` lies in the row space of the generator."""
    c = np.asarray(c, dtype=np.uint8).reshape(-1)
    if c.size != code.n:
        raise ValueError(f"vector length {c.size} != n={code.n}")
    if not c.any():
        return True
    return gf2_rank(np.vstack([code.generator, c])) == code.k


def binary_project(c, table: CosetTable) -> np.ndarray:
    """XOR of ``c`` over each coset of ``table``, ordered by coset index."""
    c = np.asarray(c, dtype=np.uint8)
    if c.shape[-1] != 1 << table.m:
        raise ValueError(f"vector length {c.shape[-1]} != 2**{table.m}")
    return (c[..., table.members].sum(axis=-1) & 1).astype(np.uint8)
