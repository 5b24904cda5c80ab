"""Closed-form throughput, latency and register-depth models of the decoder architectures."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import ceil

from .gf2_spaces import two_binomial

T_PROJ = 1
T_PREAGG = 1


def _pow2(v: int) -> bool:
    return isinstance(v, int) and v >= 1 and v & (v - 1) == 0


def default_t_fod(first_order_length: int) -> int:
    """FHT decoder pipeline depth: 3 up to length 16, 4 beyond."""
    return 3 if first_order_length <= 16 else 4


@dataclass
class HwEstimate:
    decoder: str
    throughput_mbps: float
    latency_cc_per_iter: int
    latency_cc: int
    latency_us: float
    register_depths: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def iupa_model(m: int, G: int, lam: int, f_mhz: float, t_fod: int | None = None,
               n_iters: int = 2, l_agg2nd: int | None = None,
               l_agg3rd: int | None = None) -> HwEstimate:
    """IUPA decoder for RM(m, 3) with ``G`` second-order decoders and latency ``lam``.

    ``l_agg2nd`` / ``l_agg3rd`` are the pipeline distances to the second- and
    third-order pre-aggregation units; by default the PU depth and the
    projection-plus-group depth.
    """
    if not 4 <= m <= 10 or not _pow2(G) or not _pow2(lam):
        raise ValueError("need 4 <= m <= 10 and G, lambda powers of two")
    if f_mhz <= 0 or n_iters < 1:
        raise ValueError("frequency and iteration count must be positive")
    t_fod = default_t_fod(1 << (m - 2)) if t_fod is None else t_fod
    t_group = (T_PROJ + t_fod + T_PREAGG) + lam + 1
    per_iter = T_PROJ + t_group + T_PREAGG + ceil(((1 << (m - 1)) - 1) * lam / G) + m
    l2 = T_PROJ + t_fod + T_PREAGG if l_agg2nd is None else l_agg2nd
    l3 = T_PROJ + t_group if l_agg3rd is None else l_agg3rd
    n = 1 << m
    depths = {"second_order": ceil(l2 / lam) + 1,
              "third_order": ceil(l3 / (lam * n // 2 * G)) + 1}
    total = n_iters * per_iter
    return HwEstimate("iupa", 2 * G * f_mhz / lam, per_iter, total, total / f_mhz, depths,
                      dict(m=m, r=3, G=G, lam=lam, f_mhz=f_mhz, t_fod=t_fod, n_iters=n_iters,
                           t_group=t_group))


def cpa_model(m: int, r: int, p: int, f_mhz: float, t_fod: int | None = None,
              t_add: int = 2, n_iters: int = 2) -> HwEstimate:
    """CPA decoder with ``p`` processing units; ``p`` must divide the projection count."""
    if not 2 <= r <= m <= 10:
        raise ValueError("need 2 <= r <= m <= 10")
    if f_mhz <= 0 or n_iters < 1:
        raise ValueError("frequency and iteration count must be positive")
    n_p = two_binomial(m, r - 1)
    if p < 1 or n_p % p:
        raise ValueError(f"p={p} does not divide the {n_p} projections")
    t_fod = default_t_fod(1 << (m - r + 1)) if t_fod is None else t_fod
    per_iter = T_PROJ + 1 + t_fod + T_PREAGG + t_add + n_p // p
    total = n_iters * per_iter
    return HwEstimate("cpa", p * f_mhz * (1 << m) / n_p, per_iter, total, total / f_mhz, {},
                      dict(m=m, r=r, p=p, f_mhz=f_mhz, t_fod=t_fod, t_add=t_add,
                           n_iters=n_iters, n_projections=n_p))
