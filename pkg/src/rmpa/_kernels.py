"""Compiled per-frame decoders for Monte Carlo runs.

Each kernel mirrors a reference implementation in ``pa_core``, ``iupa`` or
``cpa`` operation for operation, so fixed-point results are bit-identical and
real-valued ones agree to summation order. Float arrays select real mode,
int64 arrays fixed mode.
"""
from __future__ import annotations

import numba as nb
import numpy as np

from .allocation.schedule import IupaSchedule
from .gf2_spaces import Gf2Subspace, coset_table
from .fht import first_order_codebook

_JIT = dict(nogil=True, cache=True)


@nb.njit(**_JIT)
def _fht_inplace(w):
    n = w.shape[0]
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                a = w[j]
                b = w[j + h]
                w[j] = a + b
                w[j + h] = a - b
        h *= 2


@nb.njit(**_JIT)
def _fod(v, w, par, bits):
    n = v.shape[0]
    for z in range(n):
        w[z] = v[z]
    _fht_inplace(w)
    best = 0
    bmag = abs(w[0])
    for k in range(1, n):
        a = abs(w[k])
        if a > bmag:
            bmag = a
            best = k
    comp = 1 if w[best] < 0 else 0
    for z in range(n):
        bits[z] = par[best, z] ^ comp


@nb.njit(**_JIT)
def _fod_index(v, w):
    """``(k*, complemented)`` of the ML first-order codeword."""
    n = v.shape[0]
    for z in range(n):
        w[z] = v[z]
    _fht_inplace(w)
    best = 0
    bmag = abs(w[0])
    for k in range(1, n):
        a = abs(w[k])
        if a > bmag:
            bmag = a
            best = k
    return best, (1 if w[best] < 0 else 0)


@nb.njit(**_JIT)
def _minsum1(src, mem, dst):
    for c in range(mem.shape[0]):
        a = src[mem[c, 0]]
        b = src[mem[c, 1]]
        mag = min(abs(a), abs(b))
        dst[c] = (1 - 2 * (np.int64(a < 0) ^ np.int64(b < 0))) * mag


@nb.njit(**_JIT)
def _preagg(src, dec, co, shift, dst):
    for z in range(src.shape[0]):
        dst[z] = (1 - 2 * np.int64(dec[co[z]])) * src[z ^ shift]


@nb.njit(**_JIT)
def _tree_inplace(buf, count):
    while count > 1:
        for i in range(count // 2):
            buf[i] = (buf[2 * i] + buf[2 * i + 1]) // 2
        count //= 2


@nb.njit(**_JIT)
def _second_order(l2, cols, half, chunk, co2, mem2, par, bits, s_proj, s_w, s_dec, s_con,
                  total, cbuf):
    """Second-order hard decision over ``cols``; ``chunk > 0`` selects the divider split."""
    n2 = l2.shape[0]
    for z in range(n2):
        total[z] = 0
    fill = 0
    shift = 0
    while (1 << shift) < chunk:
        shift += 1
    for t in range(cols.shape[0]):
        j = cols[t]
        _minsum1(l2, mem2[j], s_proj)
        if chunk == 0 or j < half:
            k, comp = _fod_index(s_proj, s_w)
            prow = par[k]
            coj = co2[j]
            for z in range(n2):
                total[z] += (1 - 2 * np.int64(prow[coj[z]] ^ comp)) * l2[z ^ j]
            continue
        _fod(s_proj, s_w, par, s_dec)
        _preagg(l2, s_dec, co2[j], j, s_con)
        if True:
            for z in range(n2):
                cbuf[fill, z] = s_con[z]
            fill += 1
            if fill == chunk:
                _tree_inplace(cbuf, chunk)
                for z in range(n2):
                    total[z] += cbuf[0, z] * (1 << shift)
                fill = 0
    for z in range(n2):
        bits[z] = 1 if total[z] < 0 else 0


@nb.njit(**_JIT)
def _pa3_frame(llr, est, hist, row_ptr, row_cols, rows, ntop, count, div, half, chunk, qlo, qhi,
               nmax, co1, mem1, co2, mem2, par):
    """One frame of IPA (``rows`` = all) or IUPA (``rows`` = first half) for r = 3."""
    n = llr.shape[0]
    n2 = n // 2
    fixed = qlo < qhi
    cur = llr.copy()
    nxt = np.empty_like(llr)
    allc = np.zeros((count, n), dtype=llr.dtype)
    l2 = np.empty(n2, dtype=llr.dtype)
    s_proj = np.empty(n2 // 2, dtype=llr.dtype)
    s_w = np.empty(n2 // 2, dtype=llr.dtype)
    s_con = np.empty(n2, dtype=llr.dtype)
    total = np.empty(n2, dtype=llr.dtype)
    cbuf = np.empty((max(chunk, 1), n2), dtype=llr.dtype)
    s_dec = np.empty(n2 // 2, dtype=np.uint8)
    dec = np.empty(n2, dtype=np.uint8)
    used = 0
    for it in range(nmax):
        used = it + 1
        for r in range(ntop):
            b = rows[r]
            _minsum1(cur, mem1[b], l2)
            cols = row_cols[row_ptr[r]:row_ptr[r + 1]]
            _second_order(l2, cols, half, chunk, co2, mem2, par, dec, s_proj, s_w, s_dec,
                          s_con, total, cbuf)
            _preagg(cur, dec, co1[b], b, allc[r])
        if fixed:
            for r in range(ntop, count):
                for z in range(n):
                    allc[r, z] = 0
            _tree_inplace(allc, count)
            for z in range(n):
                est[z] = allc[0, z]
                v = allc[0, z]
                nxt[z] = qlo if v < qlo else (qhi if v > qhi else v)
        else:
            for z in range(n):
                acc = allc[0, z]
                for r in range(1, ntop):
                    acc += allc[r, z]
                est[z] = acc / div
                nxt[z] = est[z]
        for z in range(n):
            hist[it, z] = 1 if est[z] < 0 else 0
        same = True
        for z in range(n):
            if fixed:
                if nxt[z] != cur[z]:
                    same = False
                    break
            elif (nxt[z] < 0) != (cur[z] < 0):
                same = False
                break
        if same:
            break
        cur[:] = nxt
    for t in range(used, nmax):
        hist[t] = hist[used - 1]
    return used


@nb.njit(**_JIT)
def _cpa_frame(llr, est, hist, co, mem, par, nmax, fixed, pus, tree_bound, acc_bound, hand):
    n = llr.shape[0]
    n_p, ncos, csize = mem.shape
    cur = llr.copy()
    nxt = np.empty_like(llr)
    fmin = np.empty(ncos, dtype=llr.dtype)
    smin = np.empty(ncos, dtype=llr.dtype)
    amin = np.empty(ncos, dtype=np.int64)
    tsign = np.empty(ncos, dtype=np.int64)
    proj = np.empty(ncos, dtype=llr.dtype)
    w = np.empty(ncos, dtype=llr.dtype)
    dec = np.empty(ncos, dtype=np.uint8)
    buf = np.empty((pus, n), dtype=llr.dtype)
    acc = np.empty(n, dtype=llr.dtype)
    used = 0
    for it in range(nmax):
        used = it + 1
        for z in range(n):
            acc[z] = 0
        fill = 0
        for p in range(n_p):
            for c in range(ncos):
                z0 = mem[p, c, 0]
                m1 = abs(cur[z0])
                m2 = m1
                have2 = False
                am = z0
                neg = np.int64(cur[z0] < 0)
                for t in range(1, csize):
                    z = mem[p, c, t]
                    a = abs(cur[z])
                    neg ^= np.int64(cur[z] < 0)
                    if a < m1:
                        m2 = m1
                        have2 = True
                        m1 = a
                        am = z
                    elif not have2 or a < m2:
                        m2 = a
                        have2 = True
                fmin[c] = m1
                smin[c] = m2
                amin[c] = am
                tsign[c] = 1 - 2 * neg
                proj[c] = tsign[c] * m1
            _fod(proj, w, par, dec)
            row = buf[fill] if fixed else buf[0]
            for z in range(n):
                c = co[p, z]
                mag = smin[c] if amin[c] == z else fmin[c]
                s = tsign[c] * (1 - 2 * (np.int64(cur[z] < 0) ^ np.int64(dec[c])))
                row[z] = s * mag
            if not fixed:
                for z in range(n):
                    acc[z] += row[z]
                continue
            fill += 1
            if fill == pus or p == n_p - 1:
                cnt = fill
                if tree_bound > 0:
                    while cnt > 1:
                        half = cnt // 2
                        for i in range(half):
                            for z in range(n):
                                v = buf[2 * i, z] + buf[2 * i + 1, z]
                                buf[i, z] = -tree_bound if v < -tree_bound else (
                                    tree_bound if v > tree_bound else v)
                        if cnt % 2:
                            for z in range(n):
                                buf[half, z] = buf[cnt - 1, z]
                            cnt = half + 1
                        else:
                            cnt = half
                else:
                    for i in range(1, cnt):
                        for z in range(n):
                            buf[0, z] += buf[i, z]
                for z in range(n):
                    v = acc[z] + buf[0, z]
                    if acc_bound > 0:
                        v = -acc_bound if v < -acc_bound else (acc_bound if v > acc_bound else v)
                    acc[z] = v
                fill = 0
        for z in range(n):
            if fixed:
                est[z] = acc[z]
                v = acc[z]
                nxt[z] = -hand if v < -hand else (hand if v > hand else v)
            else:
                est[z] = acc[z] / n_p
                nxt[z] = est[z]
        for z in range(n):
            hist[it, z] = 1 if est[z] < 0 else 0
        same = True
        for z in range(n):
            if fixed:
                if nxt[z] != cur[z]:
                    same = False
                    break
            elif (nxt[z] < 0) != (cur[z] < 0):
                same = False
                break
        if same:
            break
        cur[:] = nxt
    for t in range(used, nmax):
        hist[t] = hist[used - 1]
    return used


@nb.njit(**_JIT)
def _pa3_batch(llrs, est, hist, iters, row_ptr, row_cols, rows, ntop, count, div, half, chunk, qlo,
               qhi, nmax, co1, mem1, co2, mem2, par):
    for f in range(llrs.shape[0]):
        iters[f] = _pa3_frame(llrs[f], est[f], hist[f], row_ptr, row_cols, rows, ntop, count, div, half,
                              chunk, qlo, qhi, nmax, co1, mem1, co2, mem2, par)


@nb.njit(**_JIT)
def _cpa_batch(llrs, est, hist, iters, co, mem, par, nmax, fixed, pus, tree_bound, acc_bound, hand):
    for f in range(llrs.shape[0]):
        iters[f] = _cpa_frame(llrs[f], est[f], hist[f], co, mem, par, nmax, fixed, pus, tree_bound,
                              acc_bound, hand)


def _one_dim_tables(m: int):
    n = 1 << m
    co = np.zeros((n, n), dtype=np.int64)
    mem = np.zeros((n, n // 2, 2), dtype=np.int64)
    for i in range(1, n):
        tab = coset_table(Gf2Subspace(m, (i,)))
        co[i] = tab.coset_of
        mem[i] = tab.members
    return co, mem


class Pa3Plan:
    """Precomputed tables for the r = 3 IPA/IUPA kernel."""

    def __init__(self, m: int, schedule: IupaSchedule | None, hw_split: bool = False):
        self.m = m
        n = 1 << m
        self.co1, self.mem1 = _one_dim_tables(m)
        self.co2, self.mem2 = _one_dim_tables(m - 1)
        self.par = np.ascontiguousarray(first_order_codebook(m - 2), dtype=np.uint8)
        self.half = 1 << (m - 2)
        if schedule is None:
            rows = list(range(1, n))
            per_row = [list(range(1, n // 2))] * len(rows)
            self.count = n
            self.div = float(n - 1)
            self.chunk = 0
        else:
            if schedule.m != m:
                raise ValueError(f"schedule is for m={schedule.m}, decoder for m={m}")
            rc = schedule.row_cols()
            rows = list(range(1, n // 2))
            per_row = [list(rc[b]) for b in rows]
            self.count = n // 2
            self.div = float(n // 2)
            chunk = self.half // schedule.lam if schedule.kind == "ilp" else 0
            ok = chunk >= 1 and all(
                sum(1 for c in cs if c >= self.half) % chunk == 0 for cs in per_row)
            self.chunk = chunk if (hw_split and ok) else 0
        self.rows = np.array(rows, dtype=np.int64)
        self.row_ptr = np.cumsum([0] + [len(c) for c in per_row]).astype(np.int64)
        self.row_cols = np.array([c for cs in per_row for c in cs], dtype=np.int64)

    def run(self, llrs, nmax: int, qlo: int = 0, qhi: int = 0):
        llrs = np.ascontiguousarray(llrs)
        est = np.empty_like(llrs)
        iters = np.empty(llrs.shape[0], dtype=np.int64)
        hist = np.empty((llrs.shape[0], nmax, llrs.shape[1]), dtype=np.uint8)
        chunk = self.chunk if qlo < qhi else 0
        _pa3_batch(llrs, est, hist, iters, self.row_ptr, self.row_cols, self.rows, len(self.rows),
                   self.count, self.div, self.half, chunk, qlo, qhi, nmax, self.co1, self.mem1,
                   self.co2, self.mem2, self.par)
        return est, iters, hist


class CpaPlan:
    """Precomputed coset tables for the CPA kernel."""

    def __init__(self, m: int, r: int):
        from .cpa import cpa_subspaces
        subs = cpa_subspaces(m, r)
        tabs = [coset_table(s) for s in subs]
        self.co = np.stack([t.coset_of for t in tabs]).astype(np.int64)
        self.mem = np.stack([t.members for t in tabs]).astype(np.int64)
        self.par = np.ascontiguousarray(first_order_codebook(m - r + 1), dtype=np.uint8)

    def run(self, llrs, nmax: int, fixed: bool, pus: int = 7, tree_bound: int = 0,
            acc_bound: int = 0, hand: int = 0):
        llrs = np.ascontiguousarray(llrs)
        est = np.empty_like(llrs)
        iters = np.empty(llrs.shape[0], dtype=np.int64)
        hist = np.empty((llrs.shape[0], nmax, llrs.shape[1]), dtype=np.uint8)
        _cpa_batch(llrs, est, hist, iters, self.co, self.mem, self.par, nmax, fixed, pus,
                   tree_bound, acc_bound, hand)
        return est, iters, hist
