"""Decoders with a scikit-learn style interface.

``fit`` precomputes projection tables, ``predict`` maps rows of channel LLRs
(positive = bit 0) to codewords, ``transform`` returns the final soft
estimate in LLR units. With ``qformat`` set, inputs are multiplied by
``llr_scale``, quantised with ``llr_rounding`` and all arithmetic is fixed
point. The real-valued decoders are insensitive to a positive input scale,
so the scale only decides how the channel LLRs use the few quantiser levels.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _kernels
from .allocation.schedule import IupaSchedule, ideal_schedule
from .base import check_code_params, check_codewords, check_llr_batch, resolve_qformat
from .cpa import cpa_handoff, cpa_iteration
from .fixed_point import ROUNDING, quantize
from .iupa import iupa_iteration
from .pa_core import DecoderConfig, converged, handoff, hard_decision, ipa_iteration

ENGINES = ("compiled", "reference")


@dataclass
class DecodeResult:
    codewords: np.ndarray  # (F, n) uint8
    iterations: np.ndarray  # (F,)
    estimate: np.ndarray  # (F, n) raw fixed-point or real LLRs
    history: np.ndarray  # (F, n_max, n) hard decision after each iteration


def _reference_run(X, cfg, step, hand, nmax):
    F, n = X.shape
    est = np.empty_like(X)
    iters = np.empty(F, dtype=np.int64)
    hist = np.empty((F, nmax, n), dtype=np.uint8)
    for f in range(F):
        cur = X[f]
        used = 0
        for used in range(1, nmax + 1):
            e = step(cur, cfg)
            hist[f, used - 1] = hard_decision(e)
            nxt = hand(e, cfg)
            if converged(nxt, cur):
                break
            cur = nxt
        hist[f, used:] = hist[f, used - 1]
        est[f] = e
        iters[f] = used
    return est, iters, hist


class _PaDecoder(BaseEstimator):
    r_allowed = None

    def _config(self) -> DecoderConfig:
        raise NotImplementedError

    def _check_common(self):
        check_code_params(self.m, self.r, r_allowed=self.r_allowed)
        if self.n_max is not None and int(self.n_max) < 1:
            raise ValueError("n_max must be at least 1")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if not float(self.llr_scale) > 0:
            raise ValueError("llr_scale must be positive")
        if self.llr_rounding not in ROUNDING:
            raise ValueError(f"llr_rounding must be one of {ROUNDING}")

    def fit(self, X=None, y=None):
        self._check_common()
        self.config_ = self._config()
        self.n_features_in_ = 1 << self.m
        self._build()
        return self

    def decode(self, X) -> DecodeResult:
        check_is_fitted(self, "config_")
        X, _ = check_llr_batch(X, self.m)
        cfg = self.config_
        if cfg.fixed:
            X = quantize(float(self.llr_scale) * X, cfg.qformat, self.llr_rounding)
        est, iters, hist = self._run(X, cfg.iterations)
        return DecodeResult(hist[:, -1].copy(), iters, est, hist)

    def predict(self, X):
        single = np.ndim(X) == 1
        cw = self.decode(X).codewords
        return cw[0] if single else cw

    def transform(self, X):
        single = np.ndim(X) == 1
        est = self.decode(X).estimate
        q = self.config_.qformat
        out = q.to_real(est) if q is not None else est
        return out[0] if single else out

    def score(self, X, y):
        """Fraction of frames decoded to exactly ``y`` (one minus the FER)."""
        cw = np.atleast_2d(self.predict(X))
        y = check_codewords(y, cw.shape)
        return float((cw == y).all(axis=1).mean())


class IPADecoder(_PaDecoder):
    """Iterative projection-aggregation over all one-dimensional subspaces."""

    r_allowed = (2, 3)

    def __init__(self, m=6, r=3, n_max=None, qformat=None, llr_scale=0.5, llr_rounding="trunc",
                 engine="compiled"):
        self.m = m
        self.r = r
        self.n_max = n_max
        self.qformat = qformat
        self.llr_scale = llr_scale
        self.llr_rounding = llr_rounding
        self.engine = engine

    def _config(self):
        return DecoderConfig(self.m, self.r, self.n_max, resolve_qformat(self.qformat))

    def _build(self):
        self.plan_ = _kernels.Pa3Plan(self.m, None) if self.r == 3 and self.engine == "compiled" else None

    def _run(self, X, nmax):
        if self.plan_ is None:
            return _reference_run(X, self.config_, ipa_iteration, handoff, nmax)
        q = self.config_.qformat
        return self.plan_.run(X, nmax, *((q.raw_min, q.raw_max) if q else (0, 0)))


def load_schedule(schedule, m: int) -> IupaSchedule:
    if isinstance(schedule, IupaSchedule):
        sched = schedule
    elif isinstance(schedule, dict):
        sched = IupaSchedule.from_dict(schedule)
    elif isinstance(schedule, str) and schedule == "ideal":
        sched = ideal_schedule(m)
    elif isinstance(schedule, (str, Path)):
        sched = IupaSchedule.load(schedule)
    else:
        raise TypeError("schedule must be 'ideal', a path, a dict or an IupaSchedule")
    if sched.m != m:
        raise ValueError(f"schedule is for m={sched.m}, decoder for m={m}")
    return sched


class IUPADecoder(_PaDecoder):
    """Unique projection-aggregation for RM(m, 3) following a schedule.

    ``hw_split`` enables the adder/divider split of the second-order combine
    for ILP schedules in fixed-point mode.
    """

    def __init__(self, m=6, schedule="ideal", n_max=None, qformat=None, hw_split=False,
                 llr_scale=0.5, llr_rounding="trunc", engine="compiled"):
        self.m = m
        self.schedule = schedule
        self.n_max = n_max
        self.qformat = qformat
        self.hw_split = hw_split
        self.llr_scale = llr_scale
        self.llr_rounding = llr_rounding
        self.engine = engine

    @property
    def r(self):
        return 3

    def _config(self):
        return DecoderConfig(self.m, 3, self.n_max, resolve_qformat(self.qformat),
                             hw_split=bool(self.hw_split))

    def _build(self):
        if not 4 <= self.m <= 8:
            raise ValueError("IUPA supports 4 <= m <= 8")
        self.schedule_ = load_schedule(self.schedule, self.m)
        self.plan_ = (_kernels.Pa3Plan(self.m, self.schedule_, bool(self.hw_split))
                      if self.engine == "compiled" else None)

    def _run(self, X, nmax):
        if self.plan_ is None:
            sched = self.schedule_
            return _reference_run(X, self.config_,
                                  lambda cur, cfg: iupa_iteration(cur, sched, cfg), handoff, nmax)
        q = self.config_.qformat
        return self.plan_.run(X, nmax, *((q.raw_min, q.raw_max) if q else (0, 0)))


class CPADecoder(_PaDecoder):
    """Collapsed projection-aggregation over all (r-1)-dimensional subspaces.

    ``adder_tree`` and ``accumulator`` ("fp" or "sat") choose the fixed-point
    reduction of the ``pus`` contributions produced per cycle.
    """

    def __init__(self, m=6, r=3, n_max=None, qformat=None, pus=7, adder_tree="fp",
                 accumulator="sat", llr_scale=0.5, llr_rounding="trunc", engine="compiled"):
        self.m = m
        self.r = r
        self.n_max = n_max
        self.qformat = qformat
        self.pus = pus
        self.adder_tree = adder_tree
        self.accumulator = accumulator
        self.llr_scale = llr_scale
        self.llr_rounding = llr_rounding
        self.engine = engine

    def _config(self):
        if not 2 <= self.r <= self.m:
            raise ValueError("CPA needs 2 <= r <= m")
        return DecoderConfig(self.m, self.r, self.n_max, resolve_qformat(self.qformat),
                             pus=int(self.pus), adder_tree=self.adder_tree,
                             accumulator=self.accumulator)

    def _build(self):
        self.plan_ = _kernels.CpaPlan(self.m, self.r) if self.engine == "compiled" else None

    def _bounds(self):
        cfg = self.config_
        q = cfg.qformat
        half = 1 << (q.total_bits - 1)
        tree = half if cfg.adder_tree == "sat" else 0
        if cfg.accumulator == "fp":
            acc = 0
        else:
            acc = half if cfg.adder_tree == "sat" else 1 << (q.total_bits - 1 + (cfg.pus - 1).bit_length())
        return tree, acc, half

    def _run(self, X, nmax):
        cfg = self.config_
        if self.plan_ is None:
            return _reference_run(X, cfg, cpa_iteration, cpa_handoff, nmax)
        if not cfg.fixed:
            return self.plan_.run(X, nmax, False)
        return self.plan_.run(X, nmax, True, cfg.pus, *self._bounds())


DECODERS = {"ipa": IPADecoder, "iupa": IUPADecoder, "cpa": CPADecoder}


def describe(decoder) -> dict:
    """Record labels (decoder id, schedule id, quantisation) of a fitted decoder."""
    cfg = decoder.config_
    q = cfg.qformat
    if isinstance(decoder, IUPADecoder):
        sched = decoder.schedule_
        name = "iupa" if sched.kind == "ideal" else "iupa-ilp"
        sid = sched.name
    else:
        name = "cpa" if isinstance(decoder, CPADecoder) else "ipa"
        sid = "-"
    if q is None:
        quant = "float"
    elif isinstance(decoder, CPADecoder):
        quant = f"{q}:AT-{cfg.adder_tree},Acc-{cfg.accumulator},p{cfg.pus}"
    else:
        quant = f"{q}:{'split' if cfg.hw_split else 'fp'}"
    return {"decoder": name, "schedule": sid, "quant": quant}
