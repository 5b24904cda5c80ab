"""Q(i:f) fixed-point arithmetic: quantisation, saturation, adder and divider trees.

Raw values are integers scaled by ``2**frac_bits``. The sign bit is counted in
the integer part, so Q(3:2) spans raw ``[-16, 15]`` i.e. ``[-4.00, 3.75]``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QFormat:
    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.int_bits < 1 or self.frac_bits < 0:
            raise ValueError(f"invalid format Q({self.int_bits}:{self.frac_bits})")

    @property
    def total_bits(self) -> int:
        return self.int_bits + self.frac_bits

    @property
    def raw_min(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def raw_max(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    def to_real(self, raw) -> np.ndarray:
        return np.asarray(raw) / self.scale

    def __str__(self) -> str:
        return f"Q({self.int_bits}:{self.frac_bits})"

    @classmethod
    def parse(cls, text: str) -> "QFormat":
        """Parse ``"Q(3:2)"`` or ``"3:2"``."""
        match = re.fullmatch(r"\s*(?:[Qq]\(?)?\s*(\d+)\s*[:.,]\s*(\d+)\s*\)?\s*", text)
        if not match:
            raise ValueError(f"cannot parse fixed-point format {text!r}")
        return cls(int(match.group(1)), int(match.group(2)))


Q32 = QFormat(3, 2)


ROUNDING = ("half_away", "trunc")


def quantize(x, q: QFormat, rounding: str = "half_away") -> np.ndarray:
    """Round onto the ``2**-f`` grid, then saturate.

    ``"half_away"`` rounds to nearest with ties away from zero; ``"trunc"``
    drops the bits below the grid toward zero, as a plain wire cut of a
    sign-magnitude value would.
    """
    x = np.asarray(x, dtype=np.float64) * q.scale
    if rounding == "half_away":
        raw = np.sign(x) * np.floor(np.abs(x) + 0.5)
    elif rounding == "trunc":
        raw = np.trunc(x)
    else:
        raise ValueError(f"rounding must be one of {ROUNDING}, got {rounding!r}")
    return np.clip(raw, q.raw_min, q.raw_max).astype(np.int64)


def saturate(x, bound: int) -> np.ndarray:
    """Clamp raw values to ``[-bound, bound]``."""
    return np.clip(x, -bound, bound)


def sat_add(a, b, bound: int):
    """Saturating addition clamped to ``[-bound, bound]``."""
    if bound <= 0:
        raise ValueError("saturation bound must be positive")
    return saturate(np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64), bound)


def adder_tree_sum(inputs, q: QFormat | None = None, p: int | None = None,
                   bound: int | None = None, axis: int = 0) -> np.ndarray:
    """Pairwise adder tree over ``axis``.

    With ``bound=None`` the tree is full precision: the result is the exact sum,
    needing ``q.total_bits + ceil(log2 p)`` bits. With a ``bound`` every
    two-input adder saturates to ``[-bound, bound]``; an odd element at a level
    passes through unchanged.
    """
    x = np.moveaxis(np.asarray(inputs, dtype=np.int64), axis, 0)
    if p is not None and x.shape[0] != p:
        raise ValueError(f"adder tree expects {p} inputs, got {x.shape[0]}")
    if x.shape[0] == 0:
        raise ValueError("adder tree needs at least one input")
    if bound is None:
        return x.sum(axis=0)
    while x.shape[0] > 1:
        half = x.shape[0] // 2
        paired = saturate(x[0:2 * half:2] + x[1:2 * half:2], bound)
        x = np.concatenate([paired, x[2 * half:]]) if x.shape[0] % 2 else paired
    return x[0]


def tree_width(q: QFormat, p: int) -> int:
    """Bit width of a full-precision adder tree over ``p`` inputs."""
    return q.total_bits + max(p - 1, 0).bit_length()


def divider_tree_average(inputs, levels: int | None = None, axis: int = 0) -> np.ndarray:
    """Average ``2**levels`` raw inputs by pairwise add-then-arithmetic-shift.

    Each level computes ``(a + b) >> 1`` (floor); the result never exceeds the
    exact mean and trails it by at most ``levels / 2`` raw units.
    """
    x = np.moveaxis(np.asarray(inputs, dtype=np.int64), axis, 0)
    count = x.shape[0]
    if count < 1 or count & (count - 1):
        raise ValueError(f"divider tree needs a power-of-two input count, got {count}")
    if levels is not None and count != 1 << levels:
        raise ValueError(f"expected {1 << levels} inputs, got {count}")
    while x.shape[0] > 1:
        x = (x[0::2] + x[1::2]) >> 1
    return x[0]
