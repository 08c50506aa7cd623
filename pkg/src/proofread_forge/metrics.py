"""Corpus metrics for proofreading answers: EM, NEM, Error, Diff, Good, Bad."""

from __future__ import annotations

import unicodedata
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .judges import Judge, JudgeError


def exact_match(answer: str, target: str) -> bool:
    return unicodedata.normalize("NFC", answer) == unicodedata.normalize("NFC", target)


def normalize(text: str) -> str:
    """Lowercase, drop Unicode punctuation (categories P*), collapse whitespace.

    Symbols (S*: currency, math, emoji) are kept.
    """
    text = unicodedata.normalize("NFC", text).lower()
    text = "".join(c for c in text if not unicodedata.category(c).startswith("P"))
    return " ".join(text.split())


def normalized_exact_match(answer: str, target: str) -> bool:
    return normalize(answer) == normalize(target)


@dataclass(frozen=True)
class ExampleVerdict:
    em: bool
    nem: bool
    has_error: bool
    diff_meaning: bool

    @property
    def good(self) -> bool:
        return not self.has_error and not self.diff_meaning

    def to_dict(self) -> dict:
        return {**asdict(self), "good": self.good}


def evaluate_example(source: str, answer: str, targets: Sequence[str], judge: Judge) -> ExampleVerdict:
    """Score one answer against its best-matching reference.

    EM/NEM hold if any reference matches; the meaning check passes if the
    answer means the same as any reference. The grammar check looks at the
    answer alone. ``source`` is accepted for judges that want it.
    """
    if not targets:
        raise ValueError("at least one target is required")
    return ExampleVerdict(
        em=any(exact_match(answer, t) for t in targets),
        nem=any(normalized_exact_match(answer, t) for t in targets),
        has_error=judge.check_grammar(answer),
        diff_meaning=not any(judge.check_same_meaning(answer, t) for t in targets),
    )


RATIOS = ("em", "nem", "error", "diff", "good", "bad")


@dataclass
class MetricsReport:
    """Corpus ratios, held as exact fractions so the identities between them hold exactly."""

    n: int
    em: Fraction
    nem: Fraction
    error: Fraction
    diff: Fraction
    good: Fraction
    bad: Fraction
    counts: dict = field(default_factory=dict)
    per_example: list | None = None

    def to_dict(self, with_examples: bool = False) -> dict:
        d = {"n": self.n, **{k: float(getattr(self, k)) for k in RATIOS}, "counts": dict(self.counts)}
        if with_examples and self.per_example is not None:
            d["per_example"] = self.per_example
        return d


def aggregate(verdicts: Sequence[ExampleVerdict], keep_examples: bool = False) -> MetricsReport:
    n = len(verdicts)
    if n == 0:
        raise ValueError("cannot evaluate an empty corpus")
    counts = {
        "em": sum(v.em for v in verdicts),
        "nem": sum(v.nem for v in verdicts),
        "error": sum(v.has_error for v in verdicts),
        "diff": sum(v.diff_meaning for v in verdicts),
        "good": sum(v.good for v in verdicts),
    }
    counts["bad"] = n - counts["good"]
    good = Fraction(counts["good"], n)
    return MetricsReport(
        n=n,
        em=Fraction(counts["em"], n),
        nem=Fraction(counts["nem"], n),
        error=Fraction(counts["error"], n),
        diff=Fraction(counts["diff"], n),
        good=good,
        bad=1 - good,
        counts=counts,
        per_example=[v.to_dict() for v in verdicts] if keep_examples else None,
    )


def evaluate_corpus(
    dataset: Iterable, answers: Iterable[str], judge: Judge, keep_examples: bool = False
) -> MetricsReport:
    """Aggregate per-example verdicts; ``dataset`` yields ``ProofreadExample``-like items.

    Items need ``source`` and ``references`` attributes (or dict keys).
    """
    dataset = list(dataset)
    answers = list(answers)
    if len(dataset) != len(answers):
        raise ValueError(f"dataset has {len(dataset)} examples but {len(answers)} answers")
    verdicts = []
    for i, (ex, answer) in enumerate(zip(dataset, answers)):
        source, refs = (ex["source"], ex["references"]) if isinstance(ex, dict) else (ex.source, ex.references)
        try:
            verdicts.append(evaluate_example(source, answer, refs, judge))
        except JudgeError as exc:
            raise JudgeError(f"example {i}: {exc}") from exc
    return aggregate(verdicts, keep_examples)
