"""Subspaces of F_2^m, quotient-space coset tables and 2-binomial counts.

Vectors of F_2^m are plain Python ints in ``[0, 2**m)``; bit ``b`` of the int
is coordinate ``b`` of the vector.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

MAX_M = 10


def _check_m(m: int) -> None:
    if not 1 <= m <= MAX_M:
        raise ValueError(f"ambient dimension m={m} outside [1, {MAX_M}]")


def two_binomial(m: int, s: int) -> int:
    """Number of ``s``-dimensional subspaces of F_2^m (Gaussian binomial, q=2)."""
    if m < 0 or s < 0:
        raise ValueError("m and s must be non-negative")
    if s > m:
        raise ValueError(f"s={s} exceeds m={m}")
    num = 1
    den = 1
    for i in range(s):
        num *= (1 << (m - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def _rref(m: int, gens: Iterable[int]) -> tuple[int, ...]:
    """Reduced row-echelon basis (descending leading bits) of span(gens)."""
    basis: dict[int, int] = {}  # leading bit -> vector
    for g in gens:
        g = int(g)
        if g < 0 or g >> m:
            raise ValueError(f"generator {g} is not an {m}-bit vector")
        for lead in sorted(basis, reverse=True):
            if g >> lead & 1:
                g ^= basis[lead]
        if g == 0:
            continue
        lead = g.bit_length() - 1
        for other in list(basis):
            if basis[other] >> lead & 1:
                basis[other] ^= g
        basis[lead] = g
    # back-substitution may have introduced bits of later pivots; one more pass
    leads = sorted(basis, reverse=True)
    for lead in leads:
        for other in leads:
            if other != lead and basis[other] >> lead & 1:
                basis[other] ^= basis[lead]
    return tuple(basis[lead] for lead in leads)


@dataclass(frozen=True)
class Gf2Subspace:
    """A subspace of F_2^m identified by its reduced row-echelon basis."""

    m: int
    basis: tuple[int, ...]

    def __post_init__(self):
        _check_m(self.m)
        if _rref(self.m, self.basis) != tuple(self.basis):
            raise ValueError(f"basis {self.basis} is not in canonical form")

    @property
    def d(self) -> int:
        return len(self.basis)

    @property
    def leading_bits(self) -> tuple[int, ...]:
        return tuple(b.bit_length() - 1 for b in self.basis)

    def span(self) -> list[int]:
        """All ``2**d`` elements, sorted ascending."""
        out = [0]
        for b in self.basis:
            out += [v ^ b for v in out]
        return sorted(out)

    def reduce(self, z: int) -> int:
        """Smallest element of the coset ``z + self``."""
        for b in self.basis:
            if z >> (b.bit_length() - 1) & 1:
                z ^= b
        return z

    def __contains__(self, z: int) -> bool:
        return self.reduce(z) == 0


def canonical_span(m: int, gens: Sequence[int]) -> Gf2Subspace:
    """Canonical subspace spanned by ``gens``, independent of generator order."""
    _check_m(m)
    if len(gens) == 0:
        raise ValueError("empty generator set")
    basis = _rref(m, gens)
    if not basis:
        raise ValueError("generators span the zero subspace")
    return Gf2Subspace(m, basis)


def enumerate_subspaces(m: int, d: int) -> list[Gf2Subspace]:
    """All ``d``-dimensional subspaces of F_2^m.

    For ``d == 1`` the order is ``{0, i}`` for ``i = 1 .. 2**m - 1``; otherwise
    the subspaces are sorted lexicographically by canonical basis.
    """
    _check_m(m)
    if not 1 <= d <= m:
        raise ValueError(f"dimension d={d} outside [1, {m}]")
    return list(_enumerate_cached(m, d))


@lru_cache(maxsize=None)
def _enumerate_cached(m: int, d: int) -> tuple[Gf2Subspace, ...]:
    if d == 1:
        return tuple(Gf2Subspace(m, (i,)) for i in range(1, 1 << m))
    # RREF bases are determined by pivot positions and free bits; generate
    # them directly rather than deduplicating spans.
    out = []
    for leads in combinations(range(m - 1, -1, -1), d):
        pivots = set(leads)
        free = [[b for b in range(lead) if b not in pivots] for lead in leads]
        sizes = [1 << len(f) for f in free]
        for combo in np.ndindex(*sizes):
            basis = []
            for lead, fbits, sel in zip(leads, free, combo):
                v = 1 << lead
                for t, b in enumerate(fbits):
                    if sel >> t & 1:
                        v |= 1 << b
                basis.append(v)
            out.append(Gf2Subspace(m, tuple(basis)))
    out.sort(key=lambda s: s.basis)
    return tuple(out)


@dataclass(frozen=True)
class CosetTable:
    """Cosets of ``subspace`` in F_2^m, indexed by ascending representative.

    ``members`` is a ``(2**(m-d), 2**d)`` int array, each row sorted, and
    ``coset_of`` maps every coordinate to its coset index.
    """

    subspace: Gf2Subspace
    reps: np.ndarray = field(repr=False)
    coset_of: np.ndarray = field(repr=False)
    members: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.subspace.m

    @property
    def n_cosets(self) -> int:
        return len(self.reps)

    @property
    def coset_size(self) -> int:
        return 1 << self.subspace.d


@lru_cache(maxsize=4096)
def coset_table(sub: Gf2Subspace) -> CosetTable:
    """Quotient-space table for ``sub``; representatives are coset minima."""
    m = sub.m
    z = np.arange(1 << m)
    red = z.copy()
    for b in sub.basis:
        lead = b.bit_length() - 1
        red = np.where((red >> lead) & 1, red ^ b, red)
    reps = np.unique(red)
    coset_of = np.searchsorted(reps, red)
    span = np.array(sub.span())
    members = np.sort(reps[:, None] ^ span[None, :], axis=1)
    for arr in (reps, coset_of, members):
        arr.setflags(write=False)
    return CosetTable(sub, reps, coset_of, members)


def compose_projection_chain(m: int, i1: int, i2: int) -> Gf2Subspace:
    """2-D subspace realized by projecting on ``{0, i1}`` then on quotient ``{0, i2}``.

    ``i2`` indexes the quotient space E/{0, i1} by coset representative order.
    """
    _check_m(m)
    if not 1 <= i1 < (1 << m):
        raise ValueError(f"first-level index {i1} out of range")
    if not 1 <= i2 < (1 << (m - 1)):
        raise ValueError(f"second-level index {i2} out of range")
    reps = coset_table(Gf2Subspace(m, (i1,))).reps
    # the rep map is linear, so reps[q] ^ reps[q ^ i2] == reps[i2] for every q
    return canonical_span(m, [i1, int(reps[0] ^ reps[i2])])
