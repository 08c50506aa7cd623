"""Judges answer grammar-error, same-meaning, good-fix and data-filter questions.

``RuleJudge`` is a deterministic heuristic used throughout the tests;
``HttpJudge`` forwards the same questions to an LLM service as JSON.
"""

from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Protocol, runtime_checkable

from .decoder import Vocabulary
from .text import fuzzy_equal, words


class JudgeError(RuntimeError):
    """The judge could not answer (unreachable service, bad response, ...)."""


@dataclass(frozen=True)
class FilterVerdict:
    ref_has_errors: bool
    ref_not_fluent: bool
    ref_diff_meaning: bool
    ref_diff_tone: bool

    @property
    def keep(self) -> bool:
        return not (self.ref_has_errors or self.ref_not_fluent or self.ref_diff_meaning or self.ref_diff_tone)

    def to_dict(self) -> dict:
        return {**asdict(self), "keep": self.keep}

    @classmethod
    def from_dict(cls, d: dict) -> "FilterVerdict":
        v = cls(
            bool(d["ref_has_errors"]), bool(d["ref_not_fluent"]), bool(d["ref_diff_meaning"]), bool(d["ref_diff_tone"])
        )
        if "keep" in d and bool(d["keep"]) != v.keep:
            raise JudgeError("filter verdict 'keep' contradicts its criteria")
        return v

    @classmethod
    def merge(cls, verdicts: list["FilterVerdict"]) -> "FilterVerdict":
        return cls(
            any(v.ref_has_errors for v in verdicts),
            any(v.ref_not_fluent for v in verdicts),
            any(v.ref_diff_meaning for v in verdicts),
            any(v.ref_diff_tone for v in verdicts),
        )


@runtime_checkable
class Judge(Protocol):
    def check_grammar(self, text: str) -> bool: ...

    def check_same_meaning(self, a: str, b: str) -> bool: ...

    def check_good_fix(self, source: str, candidate: str) -> bool: ...

    def check_filter_criteria(self, source: str, ref: str) -> FilterVerdict: ...


STOPWORDS = frozenset(
    """a an the and or but if of to in on at by for with from as into onto about over after before up down out off
    is am are was were be been being do does did have has had will would shall should can could may might must
    i me my mine you your yours he him his she her hers it its we us our ours they them their theirs this that these
    those there here so too very just also then than some any all each both such what which who whom whose when where
    why how let us ok oh yes hey""".split()
)
NEGATIONS = frozenset("not no never nothing none nobody nowhere neither nor cannot without".split())
# tense/aspect markers mapped to a canonical form so contractions compare equal
TENSE_MARKERS = {
    "will": "will", "shall": "will", "'ll": "will", "wo": "will",
    "would": "would", "'d": "would",
    "was": "past", "were": "past", "did": "past",
    "had": "had",
}  # fmt: skip
CONTRACTIONS = ("'ll", "'s", "'re", "'ve", "'d", "'m", "n't")
ALLOWED_REPEATS = frozenset({"had", "that"})


def _negation_count(tokens: list[str]) -> int:
    return sum(t in NEGATIONS or t.endswith("n't") for t in tokens)


def _base(token: str) -> str:
    for suffix in CONTRACTIONS:
        if token.endswith(suffix) and len(token) > len(suffix):
            return token[: -len(suffix)]
    return token


def _is_stopword(token: str) -> bool:
    if token in STOPWORDS:
        return True
    # misspelt function words ("wth", "teh") should not count as content
    return len(token) <= 4 and any(fuzzy_equal(token, s) for s in _SHORT_STOPWORDS)


_SHORT_STOPWORDS = sorted(w for w in STOPWORDS if 3 <= len(w) <= 4)


def _content(tokens: list[str]) -> list[str]:
    out = []
    for t in tokens:
        if t in NEGATIONS or t.endswith("n't"):
            continue
        b = _base(t)
        if not _is_stopword(b):
            out.append(b)
    return out


def _fuzzy_matches(a: list[str], b: list[str]) -> int:
    pool = Counter(b)
    matched = 0
    for w in a:
        if pool[w] > 0:
            pool[w] -= 1
            matched += 1
            continue
        for cand in sorted(pool):
            if pool[cand] > 0 and fuzzy_equal(w, cand):
                pool[cand] -= 1
                matched += 1
                break
    return matched


def _markers(tokens: list[str]) -> list[str]:
    out = []
    for t in tokens:
        if t in TENSE_MARKERS:
            out.append(TENSE_MARKERS[t])
        elif "'" in t and "'" + t.split("'", 1)[1] in TENSE_MARKERS:
            out.append(TENSE_MARKERS["'" + t.split("'", 1)[1]])
    return out


def _fuzzy_markers(tokens: list[str]) -> list[str]:
    """Markers allowing a typo in the marker word itself (corrupted sources)."""
    out = []
    for t in tokens:
        hit = TENSE_MARKERS.get(t)
        if hit is None and "'" in t:
            hit = TENSE_MARKERS.get("'" + t.split("'", 1)[1])
        if hit is None and len(t) >= 3:
            hit = next((TENSE_MARKERS[m] for m in sorted(TENSE_MARKERS) if m[0] != "'" and fuzzy_equal(t, m)), None)
        if hit is not None:
            out.append(hit)
    return out


class RuleJudge:
    """Dictionary spell check plus a content-word overlap meaning test.

    Two texts mean the same when their negation counts have equal parity and
    the Dice overlap of their content words (matching up to a typo) is at
    least ``min_overlap``. Tone differs when a tense/aspect marker of one text
    has no counterpart in the other, or exactly one of them is a question.
    """

    def __init__(self, vocab: Vocabulary | None = None, min_overlap: float = 0.6):
        self.vocab = vocab if vocab is not None else Vocabulary.default()
        self.min_overlap = min_overlap

    def check_grammar(self, text: str) -> bool:
        tokens = words(text)
        if any(t not in self.vocab for t in tokens):
            return True
        return any(a == b and a not in ALLOWED_REPEATS for a, b in zip(tokens, tokens[1:]))

    def check_same_meaning(self, a: str, b: str) -> bool:
        ta, tb = words(a), words(b)
        if _negation_count(ta) % 2 != _negation_count(tb) % 2:
            return False
        ca, cb = _content(ta), _content(tb)
        if not ca and not cb:
            ca, cb = ta, tb
            if not ca and not cb:
                return True
        if not ca or not cb:
            return False
        return 2 * _fuzzy_matches(ca, cb) / (len(ca) + len(cb)) >= self.min_overlap

    def check_good_fix(self, source: str, candidate: str) -> bool:
        return not self.check_grammar(candidate) and self.check_same_meaning(source, candidate)

    def check_filter_criteria(self, source: str, ref: str) -> FilterVerdict:
        return FilterVerdict(
            ref_has_errors=self.check_grammar(ref),
            ref_not_fluent=self._not_fluent(ref),
            ref_diff_meaning=not self.check_same_meaning(source, ref),
            ref_diff_tone=self._diff_tone(source, ref),
        )

    @staticmethod
    def _not_fluent(text: str) -> bool:
        tokens = words(text)
        if not tokens:
            return True
        if any(len(t) > 30 for t in tokens):
            return True
        return any(a == b == c for a, b, c in zip(tokens, tokens[1:], tokens[2:]))

    @staticmethod
    def _diff_tone(source: str, ref: str) -> bool:
        if ("?" in source) != ("?" in ref):
            return True
        ts, tr = words(source), words(ref)
        ref_markers = Counter(_markers(tr))
        # the source may be corrupted, so its markers are read up to a typo
        # but only its exact markers count as evidence of a different tense
        if ref_markers - Counter(_fuzzy_markers(ts)):
            return True
        return bool(Counter(_markers(ts)) - ref_markers)


class HttpJudge:
    """JSON-over-HTTP client: ``POST {endpoint} {"task", "texts"} -> {"verdict"}``."""

    def __init__(self, endpoint: str, timeout: float = 30.0, max_in_flight: int = 8):
        self.endpoint = endpoint
        self.timeout = timeout
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def _ask(self, task: str, texts: list[str]):
        body = json.dumps({"task": task, "texts": texts}).encode("utf-8")
        req = urllib.request.Request(self.endpoint, data=body, headers={"Content-Type": "application/json"})
        with self._slots:
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
            except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
                raise JudgeError(f"judge request {task!r} failed: {exc}") from exc
        if not isinstance(payload, dict) or "verdict" not in payload:
            raise JudgeError(f"judge response for {task!r} lacks 'verdict'")
        return payload["verdict"]

    def _ask_bool(self, task: str, texts: list[str]) -> bool:
        verdict = self._ask(task, texts)
        if not isinstance(verdict, bool):
            raise JudgeError(f"judge verdict for {task!r} must be a boolean, got {verdict!r}")
        return verdict

    def check_grammar(self, text: str) -> bool:
        return self._ask_bool("grammar", [text])

    def check_same_meaning(self, a: str, b: str) -> bool:
        return self._ask_bool("meaning", [a, b])

    def check_good_fix(self, source: str, candidate: str) -> bool:
        return self._ask_bool("good_fix", [source, candidate])

    def check_filter_criteria(self, source: str, ref: str) -> FilterVerdict:
        verdict = self._ask("filter", [source, ref])
        if not isinstance(verdict, dict):
            raise JudgeError(f"filter verdict must be an object, got {verdict!r}")
        try:
            return FilterVerdict.from_dict(verdict)
        except KeyError as exc:
            raise JudgeError(f"filter verdict missing {exc}") from exc


def make_judge(spec: str, vocab: Vocabulary | None = None) -> Judge:
    """``"rule"`` or an ``http(s)://`` endpoint."""
    if spec == "rule":
        return RuleJudge(vocab)
    if spec.startswith(("http://", "https://")):
        return HttpJudge(spec)
    raise ValueError(f"unknown judge {spec!r}; expected 'rule' or an http endpoint")
