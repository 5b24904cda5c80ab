"""Exact branch-and-bound for the allocation ILP.

The search works on the combinatorial core of the model: each row picks one
group, each (group, column) is on or off, and every duplicated label needs
one of its cells covered by a selected (row group, column) pair. PU counts
follow as ceil(|cols| / lambda). The node loop is compiled with numba and
runs in resumable chunks so wall-clock limits are enforced from Python.
"""
from __future__ import annotations

import time
from math import ceil

import numba as nb
import numpy as np

from .model import GroupAssignment, IlpModel, assignment_from_groups

_UNK, _IN, _OUT = 0, 1, 2
# state slots
_DEPTH, _TRAIL, _NODES, _STATUS = 0, 1, 2, 3


@nb.njit(cache=True)
def _set_row(j, val, rowdom, tr_kind, tr_a, tr_b, tr_old, st):
    t = st[_TRAIL]
    tr_kind[t] = 0
    tr_a[t] = j
    tr_b[t] = 0
    tr_old[t] = rowdom[j]
    st[_TRAIL] = t + 1
    rowdom[j] = val


@nb.njit(cache=True)
def _set_col(g, k, val, colst, tr_kind, tr_a, tr_b, tr_old, st):
    t = st[_TRAIL]
    tr_kind[t] = 1
    tr_a[t] = g
    tr_b[t] = k
    tr_old[t] = colst[g, k]
    st[_TRAIL] = t + 1
    colst[g, k] = val


@nb.njit(cache=True)
def _undo(pos, rowdom, colst, tr_kind, tr_a, tr_b, tr_old, st):
    t = st[_TRAIL]
    while t > pos:
        t -= 1
        if tr_kind[t] == 0:
            rowdom[tr_a[t]] = tr_old[t]
        else:
            colst[tr_a[t], tr_b[t]] = tr_old[t]
    st[_TRAIL] = pos


@nb.njit(cache=True)
def _propagate(rowdom, colst, lab_j, lab_k, sizes, sym_next, lam, w1, w2, best,
               tr_kind, tr_a, tr_b, tr_old, st, pick):
    """Fixpoint propagation. Returns False on conflict.

    On success ``pick`` holds the branching choice: (kind, a, b) with kind 0 =
    row a to group b, 1 = column b of group a on, -1 = complete solution.
    """
    nr = rowdom.shape[0]
    G, nc = colst.shape
    L, M = lab_j.shape
    while True:
        changed = False
        # rows per group
        for g in range(G):
            bit = 1 << g
            fixed = 0
            possible = 0
            for j in range(nr):
                if rowdom[j] & bit:
                    possible += 1
                    if rowdom[j] == bit:
                        fixed += 1
            if fixed > sizes[g] or possible < sizes[g]:
                return False
            if possible > fixed:
                if fixed == sizes[g]:
                    for j in range(nr):
                        if rowdom[j] & bit and rowdom[j] != bit:
                            _set_row(j, rowdom[j] & ~bit, rowdom, tr_kind, tr_a, tr_b, tr_old, st)
                            if rowdom[j] == 0:
                                return False
                            changed = True
                elif possible == sizes[g]:
                    for j in range(nr):
                        if rowdom[j] & bit and rowdom[j] != bit:
                            _set_row(j, bit, rowdom, tr_kind, tr_a, tr_b, tr_old, st)
                            changed = True
        # interchangeable groups ordered by their smallest row
        for g in range(G):
            h = sym_next[g]
            if h < 0:
                continue
            first = nr
            for j in range(nr):
                if rowdom[j] >> g & 1:
                    first = j
                    break
            for j in range(min(first + 1, nr)):
                if rowdom[j] >> h & 1:
                    _set_row(j, rowdom[j] & ~(1 << h), rowdom, tr_kind, tr_a, tr_b, tr_old, st)
                    if rowdom[j] == 0:
                        return False
                    changed = True
        # cost bound
        lb = 0
        for g in range(G):
            cnt = 0
            for k in range(nc):
                if colst[g, k] == _IN:
                    cnt += 1
            lb += w1 * ((cnt + lam - 1) // lam) + w2 * sizes[g] * cnt
        if lb >= best:
            return False
        for g in range(G):
            cnt = 0
            for k in range(nc):
                if colst[g, k] == _IN:
                    cnt += 1
            inc = w2 * sizes[g]
            if cnt % lam == 0:
                inc += w1
            if lb + inc >= best:
                for k in range(nc):
                    if colst[g, k] == _UNK:
                        _set_col(g, k, _OUT, colst, tr_kind, tr_a, tr_b, tr_old, st)
                        changed = True
        # label support; remembers the most constrained open label
        best_l = -1
        best_n = 1 << 30
        for l in range(L):
            n_opt = 0
            sat = False
            oj = -1
            og = -1
            ok = -1
            for t in range(M):
                j = lab_j[l, t]
                if j < 0:
                    break
                k = lab_k[l, t]
                for g in range(G):
                    if rowdom[j] >> g & 1 and colst[g, k] != _OUT:
                        if rowdom[j] == (1 << g) and colst[g, k] == _IN:
                            sat = True
                            break
                        n_opt += 1
                        oj = j
                        og = g
                        ok = k
                if sat:
                    break
            if sat:
                continue
            if n_opt == 0:
                return False
            if n_opt == 1:
                if rowdom[oj] != (1 << og):
                    _set_row(oj, 1 << og, rowdom, tr_kind, tr_a, tr_b, tr_old, st)
                if colst[og, ok] != _IN:
                    _set_col(og, ok, _IN, colst, tr_kind, tr_a, tr_b, tr_old, st)
                changed = True
            elif n_opt < best_n:
                best_n = n_opt
                best_l = l
        if changed:
            continue
        if best_l >= 0:
            # cheapest option of the chosen label: column already on, then row fixed
            score = 9
            for t in range(M):
                j = lab_j[best_l, t]
                if j < 0:
                    break
                k = lab_k[best_l, t]
                for g in range(G):
                    if rowdom[j] >> g & 1 and colst[g, k] != _OUT:
                        s = (0 if colst[g, k] == _IN else 2) + (0 if rowdom[j] == (1 << g) else 1)
                        if s < score:
                            score = s
                            if rowdom[j] != (1 << g):
                                pick[0] = 0
                                pick[1] = j
                                pick[2] = g
                            else:
                                pick[0] = 1
                                pick[1] = g
                                pick[2] = k
            return True
        # labels done; finish any free rows
        for j in range(nr):
            d = rowdom[j]
            if d & (d - 1):
                g = 0
                while not (d >> g & 1):
                    g += 1
                pick[0] = 0
                pick[1] = j
                pick[2] = g
                return True
        pick[0] = -1
        return True


@nb.njit(cache=True)
def _objective(colst, sizes, lam, w1, w2):
    G, nc = colst.shape
    obj = 0
    for g in range(G):
        cnt = 0
        for k in range(nc):
            if colst[g, k] == _IN:
                cnt += 1
        obj += w1 * ((cnt + lam - 1) // lam) + w2 * sizes[g] * cnt
    return obj


@nb.njit(cache=True)
def _search(rowdom, colst, lab_j, lab_k, sizes, sym_next, lam, w1, w2, best_arr,
            best_rows, best_cols, tr_kind, tr_a, tr_b, tr_old,
            fr_pos, fr_kind, fr_a, fr_b, fr_alt, st, max_nodes):
    """Depth-first search; returns 0 when exhausted, 1 when the node budget ran out."""
    pick = np.zeros(3, dtype=np.int64)
    budget = st[_NODES] + max_nodes
    resume = st[_STATUS] == 1
    while True:
        if not resume:
            if st[_NODES] >= budget:
                st[_STATUS] = 0
                return 1
            st[_NODES] += 1
            ok = _propagate(rowdom, colst, lab_j, lab_k, sizes, sym_next, lam, w1, w2,
                            best_arr[0], tr_kind, tr_a, tr_b, tr_old, st, pick)
            if ok and pick[0] >= 0:
                d = st[_DEPTH]
                fr_pos[d] = st[_TRAIL]
                fr_kind[d] = pick[0]
                fr_a[d] = pick[1]
                fr_b[d] = pick[2]
                fr_alt[d] = 0
                st[_DEPTH] = d + 1
                if pick[0] == 0:
                    _set_row(pick[1], 1 << pick[2], rowdom, tr_kind, tr_a, tr_b, tr_old, st)
                else:
                    _set_col(pick[1], pick[2], _IN, colst, tr_kind, tr_a, tr_b, tr_old, st)
                continue
            if ok:
                obj = _objective(colst, sizes, lam, w1, w2)
                if obj < best_arr[0]:
                    best_arr[0] = obj
                    best_rows[:] = rowdom
                    best_cols[:, :] = colst
        resume = False
        # backtrack to the next open alternative
        found = False
        while st[_DEPTH] > 0:
            d = st[_DEPTH] - 1
            _undo(fr_pos[d], rowdom, colst, tr_kind, tr_a, tr_b, tr_old, st)
            if fr_alt[d] == 0:
                fr_alt[d] = 1
                if fr_kind[d] == 0:
                    j = fr_a[d]
                    _set_row(j, rowdom[j] & ~(1 << fr_b[d]), rowdom, tr_kind, tr_a, tr_b, tr_old, st)
                else:
                    _set_col(fr_a[d], fr_b[d], _OUT, colst, tr_kind, tr_a, tr_b, tr_old, st)
                found = True
                break
            st[_DEPTH] = d
        if not found:
            _undo(0, rowdom, colst, tr_kind, tr_a, tr_b, tr_old, st)
            return 0


class _Search:
    """Resumable search state for one objective weighting."""

    def __init__(self, model: IlpModel, w1: int, w2: int, bound: int):
        D = model.D
        nr, nc = D.shape
        G = model.G
        copies = list(model.copies.values())
        width = max((len(c) for c in copies), default=1)
        self.lab_j = np.full((max(len(copies), 1), width), -1, dtype=np.int64)
        self.lab_k = np.full_like(self.lab_j, -1)
        if not copies:
            self.lab_j = self.lab_j[:0]
            self.lab_k = self.lab_k[:0]
        for li, cells in enumerate(copies):
            for t, (j, k) in enumerate(cells):
                self.lab_j[li, t] = j - 1
                self.lab_k[li, t] = k - 1
        self.sizes = np.array(model.row_sizes, dtype=np.int64)
        self.sym_next = np.full(G, -1, dtype=np.int64)
        for g in range(G - 1):
            if self.sizes[g] == self.sizes[g + 1]:
                self.sym_next[g] = g + 1
        self.rowdom = np.full(nr, (1 << G) - 1, dtype=np.int64)
        self.colst = np.zeros((G, nc), dtype=np.int64)
        cap = 4 * (nr * G + G * nc) + 16
        self.trail = [np.zeros(cap, dtype=np.int64) for _ in range(4)]
        depth = 2 * (nr * G + G * nc) + 16
        self.frames = [np.zeros(depth, dtype=np.int64) for _ in range(5)]
        self.st = np.zeros(4, dtype=np.int64)
        self.best = np.array([bound], dtype=np.int64)
        self.best_rows = np.zeros(nr, dtype=np.int64)
        self.best_cols = np.zeros((G, nc), dtype=np.int64)
        self.lam, self.w1, self.w2 = model.lam, w1, w2
        self.done = False

    def run(self, deadline: float, chunk: int = 20000) -> None:
        while not self.done and time.monotonic() < deadline:
            status = _search(self.rowdom, self.colst, self.lab_j, self.lab_k, self.sizes,
                             self.sym_next, self.lam, self.w1, self.w2, self.best,
                             self.best_rows, self.best_cols, *self.trail, *self.frames,
                             self.st, chunk)
            if status == 0:
                self.done = True
            else:
                self.st[_STATUS] = 1

    def groups(self):
        G = self.colst.shape[0]
        rows = [[j + 1 for j in range(len(self.best_rows)) if self.best_rows[j] == 1 << g]
                for g in range(G)]
        cols = [[k + 1 for k in range(self.best_cols.shape[1]) if self.best_cols[g, k] == _IN]
                for g in range(G)]
        return rows, cols

    @property
    def nodes(self) -> int:
        return int(self.st[_NODES])


def _trivial_groups(model: IlpModel):
    rows, start = [], 1
    for size in model.row_sizes:
        rows.append(list(range(start, start + size)))
        start += size
    cols = [list(model.cols) for _ in range(model.G)]
    return rows, cols


def solve_ilp(model: IlpModel, time_limit_s: float = 600.0, refine: bool = True) -> GroupAssignment:
    """Minimise total PUs; a second pass then minimises processed cells.

    The result carries ``proven=True`` when the PU optimum was certified
    within the time limit. On timeout the best incumbent is returned.
    """
    if time_limit_s <= 0:
        raise ValueError("time_limit_s must be positive")
    deadline = time.monotonic() + time_limit_s
    if not model.copies:
        return assignment_from_groups(model, *_trivial_groups(model), proven=True)
    trivial = assignment_from_groups(model, *_trivial_groups(model))
    phase1 = _Search(model, 1, 0, trivial.objective + 1)
    phase1.run(deadline)
    if phase1.best[0] > trivial.objective:
        return trivial
    proven = phase1.done
    rows, cols = phase1.groups()
    best = assignment_from_groups(model, rows, cols, proven=proven)
    if refine:
        big = model.D.size * model.G + 1
        cells = sum(s * len(c) for s, c in zip(model.row_sizes, cols))
        phase2 = _Search(model, big, 1, best.objective * big + cells)
        # the refinement gets whatever is left, capped so it never dominates
        left = deadline - time.monotonic()
        phase2.run(time.monotonic() + max(0.0, min(left, 0.25 * time_limit_s)))
        if phase2.best[0] < best.objective * big + cells:
            best = assignment_from_groups(model, *phase2.groups(), proven=proven)
    return best
