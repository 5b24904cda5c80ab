"""Redundancy tree of third-order projections and its matrices R and D."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..gf2_spaces import Gf2Subspace, compose_projection_chain, two_binomial


@dataclass(frozen=True)
class RedundancyMatrix:
    """Labels of the first-order codewords reached by (row, column) projection pairs.

    ``R[j-1, k-1]`` is the label of top-level projection ``{0, j}`` followed by
    second-level projection ``{0, k}``; labels run 1 .. two_binomial(m, 2) in
    order of first appearance (row-major). ``D`` is the left block of columns
    ``1 .. 2**(m-2) - 1``, the only place duplicates occur.
    """

    m: int
    R: np.ndarray = field(repr=False)
    subspaces: tuple[Gf2Subspace, ...] = field(repr=False)

    @property
    def n_rows(self) -> int:
        return self.R.shape[0]

    @property
    def n_d_cols(self) -> int:
        return (1 << (self.m - 2)) - 1

    @property
    def D(self) -> np.ndarray:
        return self.R[:, : self.n_d_cols]

    @property
    def right_cols(self) -> list[int]:
        """Column indices (1-based) of the duplicate-free right half."""
        return list(range(1 << (self.m - 2), 1 << (self.m - 1)))

    def d_triples(self) -> dict[int, list[tuple[int, int]]]:
        """Label -> its (row, col) cells in D, 1-based, in row-major order."""
        cells: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for j, row in enumerate(self.D, start=1):
            for k, lab in enumerate(row, start=1):
                cells[int(lab)].append((j, k))
        return dict(cells)


def build_redundancy_matrix(m: int) -> RedundancyMatrix:
    if not 4 <= m <= 8:
        raise ValueError(f"redundancy matrix supports 4 <= m <= 8, got m={m}")
    h = 1 << (m - 1)
    R = np.zeros((h - 1, h - 1), dtype=np.int32)
    ids: dict[Gf2Subspace, int] = {}
    for j in range(1, h):
        for k in range(1, h):
            sub = compose_projection_chain(m, j, k)
            if sub not in ids:
                ids[sub] = len(ids) + 1
            R[j - 1, k - 1] = ids[sub]
    assert len(ids) == two_binomial(m, 2)
    R.setflags(write=False)
    return RedundancyMatrix(m, R, tuple(ids))
