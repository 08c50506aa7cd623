"""Dataset synthesis: corrupt clean text, re-decode it, repair protected tokens, filter.

Each clean corpus line becomes the reference of one ``ProofreadExample``;
the corrupted, keyboard-decoded version becomes its source.
"""

from __future__ import annotations

import difflib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, TextIO

from .corruption import CorruptionConfig, corrupt, make_rng
from .decoder import SimulatorConfig, Vocabulary, simulate
from .judges import FilterVerdict, Judge
from .text import is_protected

log = logging.getLogger(__name__)

STAGES = ("corrupt", "simulate", "post_rules", "filter")


@dataclass
class ProofreadExample:
    source: str
    references: list[str]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.references:
            raise ValueError("an example needs at least one reference")

    def to_json(self) -> str:
        return json.dumps({"source": self.source, "references": self.references, "meta": self.meta}, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ProofreadExample":
        extra = set(d) - {"source", "references", "meta"}
        if extra:
            raise ValueError(f"unexpected example fields: {sorted(extra)}")
        return cls(d["source"], list(d["references"]), dict(d.get("meta", {})))


def read_jsonl(path: str) -> list[ProofreadExample]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(ProofreadExample.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out


def write_jsonl(examples: Iterable[ProofreadExample], fh: TextIO) -> int:
    n = 0
    for ex in examples:
        fh.write(ex.to_json() + "\n")
        n += 1
    return n


def apply_post_rules(text: str, source: str) -> str:
    """Restore URLs, emoticons/emoji and date/time tokens verbatim from ``source``.

    Tokens are aligned with difflib; a changed span is repaired pairwise when
    both sides have the same token count, or wholesale when every source
    token in it is protected. Whitespace between tokens is kept.
    """
    src_tokens = source.split()
    if not any(is_protected(t) for t in src_tokens):
        return text
    spans = _token_spans(text)
    tgt_tokens = [text[a:b] for a, b in spans]
    fixes: list[tuple[int, int, str]] = []  # (token start, token end exclusive, replacement text)
    sm = difflib.SequenceMatcher(a=src_tokens, b=tgt_tokens, autojunk=False)
    for tag, i1, i2, j1, j2 in sm.get_opcodes():
        if tag == "equal":
            continue
        src_span = src_tokens[i1:i2]
        if tag == "replace" and i2 - i1 == j2 - j1:
            for k, tok in enumerate(src_span):
                if is_protected(tok) and tgt_tokens[j1 + k] != tok:
                    fixes.append((j1 + k, j1 + k + 1, tok))
        elif src_span and all(is_protected(t) for t in src_span):
            fixes.append((j1, j2, " ".join(src_span)))
    if not fixes:
        return text
    out = []
    pos = 0
    for j1, j2, repl in fixes:
        if j1 < j2:
            start, end = spans[j1][0], spans[j2 - 1][1]
        else:
            # pure insertion: place after the previous token (or at the start)
            start = end = spans[j1 - 1][1] if j1 > 0 else 0
            repl = (" " + repl) if j1 > 0 else (repl + " ")
        out.append(text[pos:start])
        out.append(repl)
        pos = end
    out.append(text[pos:])
    return "".join(out)


def _token_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        spans.append((i, j))
        i = j
    return spans


def filter_example(ex: ProofreadExample, judge: Judge) -> FilterVerdict:
    """Judge every reference against the source; any failing criterion drops the example."""
    return FilterVerdict.merge([judge.check_filter_criteria(ex.source, ref) for ref in ex.references])


@dataclass(frozen=True)
class PipelineConfig:
    corruption: CorruptionConfig = field(default_factory=CorruptionConfig)
    simulator: SimulatorConfig = field(default_factory=SimulatorConfig)
    # Appends alternate references to the clean line; identity by default.
    expander: Callable[[str], list[str]] | None = None

    @property
    def seed(self) -> int:
        return self.corruption.seed


@dataclass
class LineResult:
    index: int
    example: ProofreadExample | None
    dropped: str | None = None


def process_line(index: int, line: str, config: PipelineConfig, vocab: Vocabulary, judge: Judge) -> LineResult:
    """Run one clean line through every stage; deterministic in ``(config.seed, index)``."""
    reference = line.rstrip("\r\n")
    if not reference.strip():
        return LineResult(index, None, "empty")
    rng = make_rng(config.seed, index)
    corrupted, edits = corrupt(reference, config.corruption, rng)
    decoded = simulate(corrupted, config.corruption.spatial, vocab, config.simulator)
    source = apply_post_rules(decoded.corrected, reference)
    references = [reference] + (list(config.expander(reference)) if config.expander else [])
    if source == reference or not source.strip():
        return LineResult(index, None, "unchanged")
    ex = ProofreadExample(
        source,
        references,
        {
            "seed": config.seed,
            "line": index,
            "pipeline_stage_tags": list(STAGES),
            "corrupted": corrupted,
            "edits": [e.to_dict() for e in edits],
        },
    )
    verdict = filter_example(ex, judge)
    ex.meta["judge_verdicts"] = verdict.to_dict()
    if not verdict.keep:
        return LineResult(index, None, "filtered")
    return LineResult(index, ex)


def _worker(args):
    index, line, config, vocab, judge = args
    return process_line(index, line, config, vocab, judge)


def build_dataset(
    corpus: Iterable[str],
    config: PipelineConfig,
    vocab: Vocabulary,
    judge: Judge,
    jobs: int = 1,
    stats: dict | None = None,
) -> Iterator[ProofreadExample]:
    """Yield kept examples in corpus order.

    With ``jobs > 1`` lines are processed in worker processes (the judge,
    vocabulary and config must pickle); output order and content do not
    depend on ``jobs``.
    """
    stats = stats if stats is not None else {}
    for key in ("lines", "kept", "empty", "unchanged", "filtered"):
        stats.setdefault(key, 0)

    def tally(res: LineResult):
        stats["lines"] += 1
        if res.example is None:
            stats[res.dropped] += 1
        else:
            stats["kept"] += 1

    if jobs <= 1:
        for i, line in enumerate(corpus):
            res = process_line(i, line, config, vocab, judge)
            tally(res)
            if res.example is not None:
                yield res.example
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            args = ((i, line, config, vocab, judge) for i, line in enumerate(corpus))
            for res in pool.map(_worker, args, chunksize=16):
                tally(res)
                if res.example is not None:
                    yield res.example
    log.info("pipeline: %(lines)d lines, %(kept)d kept, %(unchanged)d unchanged, %(filtered)d filtered", stats)


def with_seed(config: PipelineConfig, seed: int) -> PipelineConfig:
    return replace(config, corruption=replace(config.corruption, seed=seed))
