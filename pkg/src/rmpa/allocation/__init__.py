"""Projection allocation for IUPA decoding of RM(m, 3)."""
from __future__ import annotations

from sklearn.base import BaseEstimator

from .lp_format import export_lp, lp_text
from .model import (GroupAssignment, IlpModel, assignment_from_groups, build_ilp,
                    verify_assignment)
from .redundancy import RedundancyMatrix, build_redundancy_matrix
from .schedule import (IupaSchedule, ScheduleGroup, derive_schedule, duplicate_stats,
                       first_column, ideal_schedule)
from .solver import solve_ilp


class ProjectionAllocator(BaseEstimator):
    """Solve the allocation for ``G`` second-order decoders with latency ``lam``.

    After ``fit``: ``model_``, ``assignment_`` (with ``proven``), ``schedule_``
    and ``violations_`` (the independent verifier's findings, empty when valid).
    """

    def __init__(self, m=6, G=2, lam=2, time_limit=600.0, refine=True):
        self.m = m
        self.G = G
        self.lam = lam
        self.time_limit = time_limit
        self.refine = refine

    def fit(self, X=None, y=None):
        self.matrix_ = build_redundancy_matrix(int(self.m))
        self.model_ = build_ilp(self.matrix_, int(self.G), int(self.lam))
        self.assignment_ = solve_ilp(self.model_, float(self.time_limit), bool(self.refine))
        self.violations_ = verify_assignment(self.model_, self.assignment_)
        if self.violations_:
            raise RuntimeError(f"solver returned an invalid assignment: {self.violations_}")
        self.schedule_ = derive_schedule(self.assignment_, self.matrix_)
        return self

    @property
    def total_pus_(self) -> int:
        return self.assignment_.total_pus


__all__ = [
    "GroupAssignment", "IlpModel", "IupaSchedule", "ProjectionAllocator", "RedundancyMatrix",
    "ScheduleGroup", "assignment_from_groups", "build_ilp", "build_redundancy_matrix",
    "derive_schedule", "duplicate_stats", "export_lp", "first_column", "ideal_schedule",
    "lp_text", "solve_ilp", "verify_assignment",
]
