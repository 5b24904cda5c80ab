"""BPSK over AWGN and the Monte Carlo frame-error-rate engine.

Frames are generated in fixed-size blocks; block ``b`` draws from a generator
seeded by ``(seed, b)``, so results do not depend on how many workers run.
"""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .rm_code import RmCode, encode

CSV_FIELDS = ("m", "r", "decoder", "schedule", "quant", "nmax", "ebn0_db", "frames", "errors",
              "fer", "seed")
JSON_FIELDS = CSV_FIELDS + ("wall_time",)
BLOCK = 256
# frame cap so error-free points (high SNR) still terminate
MAX_FRAMES = 10_000_000


@dataclass
class FerRecord:
    m: int
    r: int
    decoder: str
    schedule: str
    quant: str
    nmax: int
    ebn0_db: float
    frames: int
    errors: int
    seed: int
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("a record needs at least one frame")

    @property
    def fer(self) -> float:
        return self.errors / self.frames

    def ci95(self) -> tuple[float, float]:
        """Wilson score interval for the FER."""
        n, p, z = self.frames, self.fer, 1.959963984540054
        den = 1 + z * z / n
        mid = (p + z * z / (2 * n)) / den
        half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
        return max(0.0, mid - half), min(1.0, mid + half)

    def row(self) -> dict:
        d = asdict(self)
        d["fer"] = self.fer
        return {k: d[k] for k in JSON_FIELDS}


def noise_variance(ebn0_db: float, rate: float) -> float:
    if not 0 < rate <= 1:
        raise ValueError("rate must lie in (0, 1]")
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def modulate_and_llr(c, ebn0_db: float, rate: float, rng) -> np.ndarray:
    """BPSK (0 -> +1) plus white Gaussian noise; returns ``2 y / sigma**2``."""
    x = 1.0 - 2.0 * np.asarray(c, dtype=np.float64)
    s2 = noise_variance(ebn0_db, rate)
    y = x + np.sqrt(s2) * rng.standard_normal(x.shape)
    return 2.0 * y / s2


def block_frames(code: RmCode, ebn0_db: float, seed: int, block: int, size: int = BLOCK):
    """Codewords and LLRs of one block; random messages, never the all-zero shortcut."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    u = rng.integers(0, 2, size=(size, code.k), dtype=np.uint8)
    c = encode(code, u)
    return c, modulate_and_llr(c, ebn0_db, code.rate, rng)


def _block_errors(decoder, code, ebn0_db, seed, b):
    c, llr = block_frames(code, ebn0_db, seed, b)
    hist = decoder.decode(llr).history
    return (hist != c[:, None, :]).any(axis=2).sum(axis=0)


def run_point(decoder, ebn0_db: float, *, seed: int = 0, min_frames: int = 100_000,
              min_errors: int = 100, max_errors: int = 1000, max_frames: int | None = MAX_FRAMES,
              workers: int = 1, labels: dict | None = None) -> list[FerRecord]:
    """Simulate one Eb/N0 point with a fitted decoder.

    Returns one record per iteration budget ``1 .. n_max``: a frame's decision
    after ``t`` iterations is exactly what a decoder capped at ``t`` outputs,
    so a single run yields them all. The stop rule is checked after every
    block, in block order, on the full-budget error count. ``max_frames=None``
    removes the frame cap.
    """
    if min_frames < 1 or workers < 1:
        raise ValueError("min_frames and workers must be positive")
    code = RmCode(decoder.m, decoder.config_.r)
    nmax = decoder.config_.iterations
    errors = np.zeros(nmax, dtype=np.int64)
    frames = 0
    t0 = time.perf_counter()
    b = 0
    done = False
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while not done:
            futs = [pool.submit(_block_errors, decoder, code, ebn0_db, seed, b + i)
                    for i in range(workers)]
            for fut in futs:
                errors += fut.result()
                frames += BLOCK
                b += 1
                e = errors[-1]
                if (e >= max_errors or (frames >= min_frames and e >= min_errors)
                        or (max_frames is not None and frames >= max_frames)):
                    done = True
                    break
    wall = time.perf_counter() - t0
    lab = dict(decoder="?", schedule="-", quant="float")
    lab.update(labels or {})
    return [FerRecord(decoder.m, code.r, lab["decoder"], lab["schedule"], lab["quant"], t + 1,
                      float(ebn0_db), frames, int(errors[t]), seed, wall)
            for t in range(nmax)]


def run_fer(decoder, ebn0_points, *, all_iterations: bool = False, **kw) -> list[FerRecord]:
    """Sweep Eb/N0; by default only the full-iteration record of each point is kept."""
    out = []
    for eb in ebn0_points:
        recs = run_point(decoder, eb, **kw)
        out.extend(recs if all_iterations else recs[-1:])
    return out


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rec in records:
        row = rec.row()
        w.writerow([_fmt(row[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def records_to_jsonl(records) -> str:
    return "".join(json.dumps(rec.row(), sort_keys=False) + "\n" for rec in records)
