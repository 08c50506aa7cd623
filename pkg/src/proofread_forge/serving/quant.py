"""Symmetric per-table int8 quantization of a target model's parameter tables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class QuantizedTable:
    values: np.ndarray  # int8
    scale: float

    def dequantize(self) -> np.ndarray:
        return self.values.astype(np.float64) * self.scale

    @property
    def nbytes(self) -> int:
        return self.values.nbytes + 8


def quantize(table: np.ndarray) -> QuantizedTable:
    """``q = round(x / s)`` with ``s = max|x| / 127``; an all-zero table gets ``s = 1``."""
    x = np.asarray(table, dtype=np.float64)
    max_abs = float(np.max(np.abs(x))) if x.size else 0.0
    scale = max_abs / 127.0 if max_abs > 0 else 1.0
    # subnormal tables: s can round to 0 or below max|x|/127, which would clip
    while scale == 0.0 or max_abs / scale > 127.5:
        scale = float(np.nextafter(scale, np.inf))
    q =np.clip(np.rint(x / scale), -127, 127).astype(np.int8)
    return QuantizedTable(q, scale)


class QuantizedModel:
    """A target model whose tables are replaced by their int8 round trip.

    The wrapped model must provide ``with_tables``.
    """

    def __init__(self, model, tables: Mapping[str, QuantizedTable]):
        self.tables = dict(tables)
        self._inner = model.with_tables({k: t.dequantize() for k, t in self.tables.items()})
        self.vocab_size = self._inner.vocab_size
        self.eos_id = self._inner.eos_id
        self.pad_id = self._inner.pad_id
        self.tokenizer = getattr(self._inner, "tokenizer", None)

    def next_token_logits(self, prefix: Sequence[int], cond: Sequence[int]) -> np.ndarray:
        return self._inner.next_token_logits(prefix, cond)

    def score_positions(self, prefix: Sequence[int], draft: Sequence[int], cond: Sequence[int]) -> np.ndarray:
        fn = getattr(self._inner, "score_positions", None)
        if fn is None:
            from .model import score_positions

            return score_positions(self._inner, prefix, draft, cond)
        return fn(prefix, draft, cond)

    def parameter_tables(self) -> dict[str, np.ndarray]:
        return {k: t.dequantize() for k, t in self.tables.items()}

    @property
    def nbytes(self) -> int:
        return sum(t.nbytes for t in self.tables.values())


def quantize_tables(model) -> QuantizedModel:
    return QuantizedModel(model, {name: quantize(t) for name, t in model.parameter_tables().items()})
