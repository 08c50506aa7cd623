"""Desk-scale serving: buckets, segmentation, speculative decoding, int8 tables."""

from .decoding import (
    Drafter,
    InputDrafter,
    SpecDecodeTrace,
    StepRecord,
    align_anchor,
    autoregressive_decode,
    speculative_decode,
)
from .model import EOS, PAD, UNK, EditChannelModel, TableModel, TargetModel, Tokenizer, score_positions
from .quant import QuantizedModel, QuantizedTable, quantize, quantize_tables
from .segmentation import OverLengthError, Segment, ServingConfig, pad_to_bucket, pick_bucket, rejoin, segment
from .service import BenchReport, bench, bench_corpus_path, proofread_document, proofread_segment

__all__ = [
    "BenchReport",
    "Drafter",
    "EOS",
    "EditChannelModel",
    "InputDrafter",
    "OverLengthError",
    "PAD",
    "QuantizedModel",
    "QuantizedTable",
    "Segment",
    "ServingConfig",
    "SpecDecodeTrace",
    "StepRecord",
    "TableModel",
    "TargetModel",
    "Tokenizer",
    "UNK",
    "align_anchor",
    "autoregressive_decode",
    "bench",
    "bench_corpus_path",
    "pad_to_bucket",
    "pick_bucket",
    "proofread_document",
    "proofread_segment",
    "quantize",
    "quantize_tables",
    "rejoin",
    "score_positions",
    "segment",
    "speculative_decode",
]
