"""IUPA schedules: which second-order columns each top-level row processes."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from math import ceil
from pathlib import Path

from ..gf2_spaces import compose_projection_chain, two_binomial
from .model import GroupAssignment
from .redundancy import RedundancyMatrix

SCHEDULE_KEYS = ("m", "G", "lambda", "kind", "groups", "duplicates")
GROUP_KEYS = ("rows", "cols", "p")


@dataclass(frozen=True)
class ScheduleGroup:
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    p: int
    dummy: bool = False


@dataclass(frozen=True)
class IupaSchedule:
    """Row groups of the top-level projections and their full column sets.

    ``kind`` is ``"ideal"`` (one group per row, every label exactly once) or
    ``"ilp"`` (groups from an allocation). Group 0 of an ILP schedule is the
    short group that also carries the all-zero dummy vector.
    """

    m: int
    G: int
    lam: int
    groups: tuple[ScheduleGroup, ...]
    kind: str = "ilp"
    duplicates: int = field(default=0, compare=False)

    def __post_init__(self):
        rows = sorted(r for g in self.groups for r in g.rows)
        if rows != list(range(1, 1 << (self.m - 1))):
            raise ValueError("schedule rows must partition 1 .. 2**(m-1) - 1")
        top = (1 << (self.m - 1)) - 1
        for g in self.groups:
            if any(not 1 <= c <= top for c in g.cols):
                raise ValueError(f"column out of range 1..{top}")

    @property
    def l(self) -> int:
        return self.lam.bit_length() - 1

    @property
    def name(self) -> str:
        return "ideal" if self.kind == "ideal" else f"ilp({self.G},{self.lam})"

    def row_cols(self) -> dict[int, tuple[int, ...]]:
        return {r: g.cols for g in self.groups for r in g.rows}

    @property
    def fod_count(self) -> int:
        """Second-level first-order decodings per iteration."""
        return sum(len(g.rows) * len(g.cols) for g in self.groups)

    def coverage(self) -> Counter:
        """How often each 2-D subspace (first-order label) is decoded per iteration."""
        return Counter(compose_projection_chain(self.m, r, c)
                       for g in self.groups for r in g.rows for c in g.cols)

    def to_dict(self) -> dict:
        return {
            "m": self.m, "G": self.G, "lambda": self.lam, "kind": self.kind,
            "groups": [{"rows": list(g.rows), "cols": list(g.cols), "p": g.p}
                       for g in self.groups],
            "duplicates": self.duplicates,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IupaSchedule":
        missing = [k for k in SCHEDULE_KEYS if k not in d]
        if missing:
            raise ValueError(f"schedule is missing keys: {missing}")
        groups = []
        for i, g in enumerate(d["groups"]):
            if any(k not in g for k in GROUP_KEYS):
                raise ValueError(f"group {i} needs keys {GROUP_KEYS}")
            groups.append(ScheduleGroup(tuple(int(r) for r in g["rows"]),
                                        tuple(int(c) for c in g["cols"]), int(g["p"]),
                                        dummy=(i == 0 and d["kind"] == "ilp")))
        if len(groups) != int(d["G"]):
            raise ValueError("group count does not match G")
        return cls(int(d["m"]), int(d["G"]), int(d["lambda"]), tuple(groups), d["kind"],
                   int(d["duplicates"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "IupaSchedule":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed schedule file {path}: {exc}") from exc
        return cls.from_dict(data)


def duplicate_stats(sched: IupaSchedule) -> tuple[int, int]:
    """``(extra decodings, labels decoded more than once)``.

    The first is the number of first-order decodings beyond one per label.
    """
    cov = sched.coverage()
    total = two_binomial(sched.m, 2)
    if len(cov) != total:
        raise ValueError(f"schedule covers {len(cov)} of {total} labels")
    return sched.fod_count - total, sum(1 for v in cov.values() if v > 1)


def derive_schedule(assign: GroupAssignment, Dm: RedundancyMatrix) -> IupaSchedule:
    """Complete an allocation: every group also processes the whole right half."""
    right = tuple(Dm.right_cols)
    groups = tuple(
        ScheduleGroup(tuple(sorted(rows)), tuple(sorted(cols)) + right,
                      ceil(len(cols) / assign.lam) + assign.extra_pus, dummy=(g == 0))
        for g, (rows, cols) in enumerate(zip(assign.rows, assign.cols)))
    sched = IupaSchedule(Dm.m, assign.G, assign.lam, groups, "ilp")
    extra, _ = duplicate_stats(sched)
    return IupaSchedule(Dm.m, assign.G, assign.lam, groups, "ilp", extra)


def first_column(b: int) -> int:
    """First column row ``b`` needs in the duplicate-free schedule."""
    if b < 1:
        raise ValueError("row index starts at 1")
    return 1 << (b.bit_length() - 1)


def ideal_schedule(m: int) -> IupaSchedule:
    """Duplicate-free schedule: row ``b`` takes columns ``2**floor(log2 b)`` .. ``2**(m-1) - 1``."""
    if not 4 <= m <= 8:
        raise ValueError(f"ideal schedule supports 4 <= m <= 8, got m={m}")
    last = (1 << (m - 1)) - 1
    groups = tuple(ScheduleGroup((b,), tuple(range(first_column(b), last + 1)),
                                 last + 1 - first_column(b))
                   for b in range(1, last + 1))
    return IupaSchedule(m, len(groups), 1, groups, "ideal", 0)
