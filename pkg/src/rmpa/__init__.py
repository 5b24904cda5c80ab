"""Projection-aggregation decoders for Reed-Muller codes."""
from __future__ import annotations

from .estimators import CPADecoder, DecodeResult, IPADecoder, IUPADecoder, describe
from .fixed_point import Q32, QFormat
from .rm_code import RmCode, encode, generator_matrix, is_codeword

__version__ = "0.1.0"

__all__ = [
    "CPADecoder", "DecodeResult", "IPADecoder", "IUPADecoder", "Q32", "QFormat", "RmCode",
    "describe", "encode", "generator_matrix", "is_codeword",
]
