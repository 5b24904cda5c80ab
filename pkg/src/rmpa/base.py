"""Input validation shared by the estimators."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .fixed_point import QFormat


def check_code_params(m: int, r: int, *, r_allowed=None, m_range=(2, 10)) -> None:
    if not isinstance(m, (int, np.integer)) or not m_range[0] <= m <= m_range[1]:
        raise ValueError(f"m must be an integer in {m_range}, got {m!r}")
    if r_allowed is not None and r not in r_allowed:
        raise ValueError(f"r must be one of {tuple(r_allowed)}, got {r!r}")
    if not 0 <= r <= m:
        raise ValueError(f"need 0 <= r <= m, got r={r}, m={m}")


def check_llr_batch(X, m: int) -> tuple[np.ndarray, bool]:
    """2-D float array of LLR rows of length ``2**m``; second value says if the input was 1-D."""
    single = np.ndim(X) == 1
    arr = check_array(np.atleast_2d(X), dtype=np.float64, ensure_all_finite=True)
    if arr.shape[1] != 1 << m:
        raise ValueError(f"expected LLR rows of length {1 << m}, got {arr.shape[1]}")
    return np.ascontiguousarray(arr), single


def check_codewords(y, shape) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(y))
    if arr.shape != shape:
        raise ValueError(f"codeword array shape {arr.shape} does not match {shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("codewords must be binary")
    return arr.astype(np.uint8)


def resolve_qformat(q) -> QFormat | None:
    if q is None or isinstance(q, QFormat):
        return q
    if isinstance(q, str):
        return None if q.lower() in ("", "float", "none") else QFormat.parse(q)
    raise TypeError(f"qformat must be None, a QFormat or a string, got {type(q).__name__}")
