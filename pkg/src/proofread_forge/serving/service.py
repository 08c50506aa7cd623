"""Document-level serving and the latency benchmark."""

from __future__ import annotations

import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from ..corruption import make_rng
from .decoding import SpecDecodeTrace, autoregressive_decode, speculative_decode
from .model import TargetModel, Tokenizer
from .segmentation import Segment, ServingConfig, pad_to_bucket, segment

MODES = ("baseline", "speculative")


def _decoder(mode: str):
    if mode == "baseline":
        return autoregressive_decode
    if mode == "speculative":
        return speculative_decode
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def proofread_segment(
    text: str, model: TargetModel, tokenizer: Tokenizer, cfg: ServingConfig, index: int = 0, mode: str = "speculative"
) -> tuple[str, SpecDecodeTrace | None]:
    if not text.strip():
        return text, None
    surface = text.split()
    ids = pad_to_bucket(tokenizer.encode(text), cfg, tokenizer.pad_id)
    out, trace = _decoder(mode)(model, ids, cfg, make_rng(cfg.seed, index))
    return tokenizer.decode(out, surface), trace


def proofread_document(
    document: str,
    model: TargetModel,
    tokenizer: Tokenizer,
    cfg: ServingConfig = ServingConfig(),
    mode: str = "speculative",
    jobs: int | None = None,
) -> str:
    """Segment, correct every segment (concurrently when ``jobs > 1``), rejoin.

    Segment ``i`` always decodes with ``make_rng(cfg.seed, i)``, so the output
    does not depend on ``jobs``. Whitespace inside a segment is normalised to
    single spaces; separators between segments are kept.
    """
    jobs = cfg.jobs if jobs is None else jobs
    segs = segment(document, cfg)

    def run(item: tuple[int, Segment]) -> str:
        i, seg = item
        return proofread_segment(seg.text, model, tokenizer, cfg, i, mode)[0]

    if jobs > 1 and len(segs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            texts = list(pool.map(run, enumerate(segs)))
    else:
        texts = [run(item) for item in enumerate(segs)]
    return "".join(t + s.sep for t, s in zip(texts, segs))


@dataclass
class ModeStats:
    median_ms: float
    median_target_calls: float
    mean_accepted: float | None = None

    def to_dict(self) -> dict:
        d = {"median_ms": self.median_ms, "median_target_calls": self.median_target_calls}
        if self.mean_accepted is not None:
            d["mean_accepted_per_step"] = self.mean_accepted
        return d


@dataclass
class BenchReport:
    n: int
    mode: str
    baseline: ModeStats
    speculative: ModeStats
    # median over examples of 1 - spec_calls / baseline_calls, in percent
    call_reduction_pct: float
    # relative reduction of the median wall time, in percent
    time_reduction_pct: float
    traces: list[dict] | None = field(default=None)

    def to_dict(self) -> dict:
        chosen = self.speculative if self.mode == "speculative" else self.baseline
        d = {
            "n": self.n,
            "mode": self.mode,
            "median_ms": chosen.median_ms,
            "median_target_calls": chosen.median_target_calls,
            "reduction_pct": self.call_reduction_pct,
            "time_reduction_pct": self.time_reduction_pct,
            "baseline": self.baseline.to_dict(),
            "speculative": self.speculative.to_dict(),
        }
        if self.traces is not None:
            d["traces"] = self.traces
        return d


def bench(
    model: TargetModel,
    tokenizer: Tokenizer,
    sources: Sequence[str],
    cfg: ServingConfig = ServingConfig(),
    mode: str = "speculative",
    keep_traces: bool = False,
) -> BenchReport:
    """Decode every source both ways, one request at a time.

    Requests run sequentially so timings do not interfere. Each source must
    fit a bucket; segment longer documents first.
    """
    _decoder(mode)
    if not sources:
        raise ValueError("bench needs at least one example")
    base_ms, spec_ms, base_calls, spec_calls, ratios, accepted = [], [], [], [], [], []
    traces = [] if keep_traces else None
    for i, text in enumerate(sources):
        ids = pad_to_bucket(tokenizer.encode(text), cfg, tokenizer.pad_id)
        _, tb = autoregressive_decode(model, ids, cfg, make_rng(cfg.seed, i, 0))
        _, ts = speculative_decode(model, ids, cfg, make_rng(cfg.seed, i, 1))
        base_ms.append(tb.wall_time * 1e3)
        spec_ms.append(ts.wall_time * 1e3)
        base_calls.append(tb.total_target_calls)
        spec_calls.append(ts.total_target_calls)
        ratios.append(1.0 - ts.total_target_calls / tb.total_target_calls)
        accepted.extend(ts.accepted_lengths)
        if traces is not None:
            traces.append({"index": i, "baseline": tb.to_dict(), "speculative": ts.to_dict()})
    b = ModeStats(statistics.median(base_ms), statistics.median(base_calls))
    s = ModeStats(statistics.median(spec_ms), statistics.median(spec_calls), statistics.fmean(accepted))
    time_red = 100.0 * (1.0 - s.median_ms / b.median_ms) if b.median_ms > 0 else 0.0
    return BenchReport(len(sources), mode, b, s, 100.0 * statistics.median(ratios), time_red, traces)


def bench_corpus_path():
    """The shipped lightly corrupted benchmark set (JSONL of examples)."""
    return resources.files("proofread_forge") / "data" / "bench.jsonl"
