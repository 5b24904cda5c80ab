"""The projection-allocation ILP: model construction and an independent verifier."""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from math import ceil

import numpy as np

from .redundancy import RedundancyMatrix


def _is_pow2(v: int) -> bool:
    return v >= 1 and v & (v - 1) == 0


@dataclass(frozen=True)
class IlpModel:
    """Allocation ILP over the duplicate-bearing block D.

    Variables (0-based group ``i``, 1-based row ``j`` and column ``k``):
    binary ``x[i, j, k]`` for every D cell whose label has several copies,
    ``c[i, k]`` and ``r[i, j]`` in [0, 1] and integer ``p[i] >= 0``.
    """

    D: np.ndarray = field(repr=False)
    G: int
    lam: int
    m: int | None = None

    @property
    def rows(self) -> list[int]:
        return list(range(1, self.D.shape[0] + 1))

    @property
    def cols(self) -> list[int]:
        return list(range(1, self.D.shape[1] + 1))

    @property
    def row_sizes(self) -> list[int]:
        """Rows per group, as even as possible with group 0 the smallest.

        With ``2**(m-1) - 1`` rows and ``G`` a power of two, group 0 holds one
        row fewer than the others; it also carries the all-zero dummy.
        """
        base, rem = divmod(len(self.rows), self.G)
        return [base + (g >= self.G - rem) for g in range(self.G)]

    @property
    def copies(self) -> dict[int, list[tuple[int, int]]]:
        """Labels with more than one cell in D, mapped to their (row, col) cells."""
        cells: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for j, row in enumerate(self.D, start=1):
            for k, lab in enumerate(row, start=1):
                cells[int(lab)].append((j, k))
        return {lab: cs for lab, cs in sorted(cells.items()) if len(cs) > 1}

    @property
    def x_cells(self) -> list[tuple[int, int]]:
        return sorted(c for cs in self.copies.values() for c in cs)

    @property
    def n_x(self) -> int:
        return self.G * len(self.x_cells)

    @property
    def extra_pus(self) -> int:
        """PUs each group dedicates to the right half of R."""
        if self.m is None:
            return 0
        return max((1 << (self.m - 2)) // self.lam, 1)


def build_ilp(Dm, G: int, lam: int) -> IlpModel:
    """Allocation model for ``G`` second-order decoders at latency ``lam``.

    ``Dm`` is a :class:`RedundancyMatrix` or a raw label matrix for D.
    """
    if not _is_pow2(G) or not _is_pow2(lam):
        raise ValueError(f"G={G} and lambda={lam} must be powers of two")
    if isinstance(Dm, RedundancyMatrix):
        D, m = Dm.D, Dm.m
    else:
        D, m = np.asarray(Dm), None
    if D.ndim != 2:
        raise ValueError("D must be a 2-D label matrix")
    if G > D.shape[0]:
        raise ValueError("more groups than rows")
    return IlpModel(np.array(D, copy=True), G, lam, m)


@dataclass
class GroupAssignment:
    """Solved allocation: per group rows, ILP columns and PU count."""

    G: int
    lam: int
    rows: list[list[int]]
    cols: list[list[int]]
    p: list[int]
    extra_pus: int = 0
    proven: bool = False
    x: dict[int, tuple[int, int, int]] = field(default_factory=dict, repr=False)
    m: int | None = None

    @property
    def objective(self) -> int:
        return sum(self.p)

    @property
    def total_pus(self) -> int:
        return self.objective + self.G * self.extra_pus

    @property
    def processed_cells(self) -> int:
        return sum(len(r) * len(c) for r, c in zip(self.rows, self.cols))


def assignment_from_groups(model: IlpModel, rows, cols, proven=False) -> GroupAssignment:
    """Pick one covering cell per label and round ``c`` down to the columns used."""
    group_of = {j: g for g, rs in enumerate(rows) for j in rs}
    colsets = [set(c) for c in cols]
    usage = Counter()
    x = {}
    for lab, cells in model.copies.items():
        options = [(group_of[j], j, k) for j, k in cells if k in colsets[group_of[j]]]
        if not options:
            raise ValueError(f"label {lab} is not covered")
        x[lab] = options[0]
    # drop columns no label needs, least used first
    for g, _, k in x.values():
        usage[g, k] += 1
    changed = True
    while changed:
        changed = False
        for (g, k), _ in sorted(usage.items(), key=lambda t: (t[1], t[0])):
            alt = {}
            for lab, (gg, j, kk) in x.items():
                if (gg, kk) != (g, k):
                    continue
                choices = [(group_of[j2], j2, k2) for j2, k2 in model.copies[lab]
                           if k2 in colsets[group_of[j2]] and (group_of[j2], k2) != (g, k)]
                if not choices:
                    break
                alt[lab] = choices[0]
            else:
                colsets[g].discard(k)
                for lab, choice in alt.items():
                    usage[g, k] -= 1
                    x[lab] = choice
                    usage[choice[0], choice[2]] += 1
                del usage[g, k]
                changed = True
                break
    used = [sorted({k for gg, _, k in x.values() if gg == g}) for g in range(model.G)]
    p = [ceil(len(c) / model.lam) for c in used]
    return GroupAssignment(model.G, model.lam, [sorted(r) for r in rows], used, p,
                           model.extra_pus, proven, x, model.m)


def verify_assignment(model: IlpModel, a: GroupAssignment) -> list[str]:
    """Check every ILP constraint directly from D; returns the violations found."""
    errs = []
    G, lam = model.G, model.lam
    x = np.zeros((G, *model.D.shape), dtype=int)
    for lab, (g, j, k) in a.x.items():
        if not 0 <= g < G:
            errs.append(f"label {lab}: group {g} out of range")
            continue
        if model.D[j - 1, k - 1] != lab:
            errs.append(f"label {lab}: cell ({j},{k}) holds {model.D[j - 1, k - 1]}")
        x[g, j - 1, k - 1] += 1
    c = np.zeros((G, model.D.shape[1]), dtype=int)
    r = np.zeros((G, model.D.shape[0]), dtype=int)
    for g in range(G):
        for k in a.cols[g]:
            c[g, k - 1] = 1
        for j in a.rows[g]:
            r[g, j - 1] = 1
    for g in range(G):
        if c[g].sum() > lam * a.p[g]:
            errs.append(f"group {g}: {c[g].sum()} columns exceed lambda*p = {lam * a.p[g]}")
    for lab, cells in model.copies.items():
        total = sum(x[g, j - 1, k - 1] for g in range(G) for j, k in cells)
        if total != 1:
            errs.append(f"label {lab}: selected {total} times")
    if (x > 1).any():
        errs.append("x is not binary")
    gi, ji, ki = np.nonzero(x)
    for g, j, k in zip(gi, ji, ki):
        if c[g, k] < 1:
            errs.append(f"x[{g},{j + 1},{k + 1}] set without column")
        if r[g, j] < 1:
            errs.append(f"x[{g},{j + 1},{k + 1}] set without row")
    if not (r.sum(axis=0) == 1).all():
        errs.append("a row is not in exactly one group")
    for g, size in enumerate(model.row_sizes):
        if r[g].sum() != size:
            errs.append(f"group {g}: {r[g].sum()} rows, expected {size}")
    if any(pi < 0 for pi in a.p):
        errs.append("negative PU count")
    return errs
