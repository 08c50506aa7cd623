"""Keyboard decoder simulator: literal decoding, key correction (KC) and auto correction (AC).

Corrupted text is re-typed as touches and decoded the way an on-device
keyboard would, so the errors kept in the dataset look like the ones real
decoding leaves behind.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .text import is_protected
from .keyboard import (
    KeyboardLayout,
    SpatialModel,
    TouchPoint,
    fold,
    key_center,
    nearest_key,
    sample_touch,
    touch_log_likelihoods,
)

AC_MARGIN = math.log(10.0)
INDEL_PENALTY = -6.0
UNSEEN_COUNT = 0.1

# token = punctuation + core + punctuation; digits count as (mistyped) letters inside a core
_CORE_RE = re.compile(r"^([^A-Za-z0-9]*)([A-Za-z0-9](?:[A-Za-z0-9']*[A-Za-z0-9])?)([^A-Za-z0-9]*)$")
_TOKEN_RE = re.compile(r"\S+")


class _Node:
    __slots__ = ("children", "count", "word_count")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.count = 0  # summed counts of all words below
        self.word_count = 0


class Vocabulary:
    """Word counts with a character trie over the entries."""

    def __init__(self, counts: Mapping[str, int]):
        root = _Node()
        entries: dict[str, int] = {}
        for word, count in counts.items():
            count = int(count)
            if count < 1:
                raise ValueError(f"count for {word!r} must be >= 1")
            if not word:
                raise ValueError("empty word in vocabulary")
            entries[word] = entries.get(word, 0) + count
        for word, count in entries.items():
            node = root
            node.count += count
            for ch in word:
                node = node.children.setdefault(ch, _Node())
                node.count += count
            node.word_count += count
        self.entries = entries
        self.total = sum(entries.values())
        self.root = root

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def log_prior(self, word: str, unseen_count: float = UNSEEN_COUNT) -> float:
        if self.total == 0:
            return 0.0
        return math.log(self.entries.get(word, unseen_count) / self.total)

    def walk(self, prefix: str) -> _Node | None:
        node = self.root
        for ch in prefix:
            node = node.children.get(ch)
            if node is None:
                return None
        return node

    def words(self) -> Iterable[str]:
        return self.entries.keys()

    def within(self, word: str, max_ed: int) -> list[tuple[str, int]]:
        """All entries within Levenshtein distance ``max_ed`` of ``word``."""
        out: list[tuple[str, int]] = []
        n = len(word)
        cols = range(1, n + 1)
        stack = [(child, ch, ch, list(range(n + 1))) for ch, child in self.root.children.items()]
        while stack:
            node, ch, prefix, prev = stack.pop()
            row = [prev[0] + 1]
            left = row[0]
            for j in cols:
                diag = prev[j - 1] if word[j - 1] == ch else prev[j - 1] + 1
                up = prev[j] + 1
                left = left + 1
                if up < left:
                    left = up
                if diag < left:
                    left = diag
                row.append(left)
            if node.word_count and left <= max_ed:
                out.append((prefix, left))
            if min(row) <= max_ed:
                for c, child in node.children.items():
                    stack.append((child, c, prefix + c, row))
        out.sort()
        return out

    @classmethod
    def from_tsv(cls, path: str | Path) -> "Vocabulary":
        counts: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                try:
                    word, count = line.split("\t")
                    counts[word] = counts.get(word, 0) + int(count)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: expected 'word<TAB>count'") from None
        return cls(counts)

    @classmethod
    def default(cls) -> "Vocabulary":
        """The bundled ~10k-word English frequency list."""
        with resources.as_file(resources.files("proofread_forge") / "data" / "vocab_en.tsv") as path:
            return cls.from_tsv(path)


@dataclass
class WordDecode:
    literal_word: str
    committed_word: str
    score: float

    def to_dict(self) -> dict:
        return {"literal_word": self.literal_word, "committed_word": self.committed_word, "score": self.score}


@dataclass
class DecodeResult:
    literal: str
    corrected: str
    per_word: list[WordDecode]
    separators: list[str] = field(default_factory=list)

    def reconstruct(self) -> str:
        """Committed text from ``per_word`` and ``separators``."""
        return _join([w.committed_word for w in self.per_word], self.separators)

    def to_dict(self) -> dict:
        return {"literal": self.literal, "corrected": self.corrected, "per_word": [w.to_dict() for w in self.per_word]}


@dataclass(frozen=True)
class SimulatorConfig:
    beam_width: int = 8
    max_ed: int = 2
    ac_margin: float = AC_MARGIN
    indel_penalty: float = INDEL_PENALTY
    unseen_count: float = UNSEEN_COUNT
    # KC only considers keys within this many sigmas of a touch.
    kc_radius: float = 3.0
    # False: touches sit at key centres (the corrupted text already carries
    # the positional noise). True: touches are re-sampled from the model.
    touch_noise: bool = False
    seed: int = 0


def encode_touches(text: str, spatial: SpatialModel, rng: np.random.Generator | None = None) -> list:
    """One touch per typeable character; other characters pass through as literal markers.

    Without ``rng`` the touches sit exactly at key centres.
    """
    out: list = []
    for ch in text:
        key = fold(ch, spatial.layout)
        if key is None:
            out.append(ch)
        elif rng is None:
            out.append(key_center(spatial.layout, key))
        else:
            out.append(sample_touch(spatial, key, rng))
    return out


def literal_decode(touches: list, layout: KeyboardLayout) -> str:
    return "".join(t if isinstance(t, str) else nearest_key(layout, t) for t in touches)


def key_correct(touches: list, model: SpatialModel, vocab: Vocabulary, k: int = 8, radius: float = 3.0) -> str:
    """Beam search over the vocabulary trie, one emitted key per touch.

    A hypothesis scores the touch log-likelihood of each emitted key plus the
    trie's continuation log-probability, and must end on a complete word.
    Only keys within ``radius`` sigmas of a touch are considered. If no word
    survives (the touches leave the trie) the literal decode is returned.
    """
    if k < 1:
        raise ValueError("beam width must be >= 1")
    literal = literal_decode(touches, model.layout)
    if not touches or any(isinstance(t, str) for t in touches) or vocab.total == 0:
        return literal
    floor = -0.5 * radius * radius
    beam: list[tuple[float, str, _Node]] = [(0.0, "", vocab.root)]
    for t in touches:
        ll = touch_log_likelihoods(model, t)
        reach = {c: v for c, v in ll.items() if v >= floor}
        if not reach:
            return literal
        expanded = []
        for score, text, node in beam:
            for c, child in node.children.items():
                v = reach.get(c)
                if v is not None:
                    expanded.append((score + v + math.log(child.count / node.count), text + c, child))
        if not expanded:
            return literal
        expanded.sort(key=lambda h: (-h[0], h[1]))
        beam = expanded[:k]
    finished = [
        (score + math.log(node.word_count / node.count), text) for score, text, node in beam if node.word_count
    ]
    if not finished:
        return literal
    return min(finished, key=lambda h: (-h[0], h[1]))[1]


def channel_score(
    word: str,
    touches: list,
    model: SpatialModel,
    literal: str | None = None,
    indel_penalty: float = INDEL_PENALTY,
    lls: list[dict[str, float]] | None = None,
) -> tuple[float, int]:
    """Touch log-likelihood of ``word`` under its minimal-cost edit alignment.

    Alignment uses unit-cost Levenshtein between ``literal`` (default: the
    literal decode of ``touches``) and ``word``. Aligned touches score the
    Gaussian at the word's key; unaligned touches and unmatched word
    characters each pay ``indel_penalty``. Among minimal-cost alignments the
    highest-scoring one is used. Returns ``(score, edit_distance)``.
    """
    if literal is None:
        literal = literal_decode(touches, model.layout)
    n, m = len(touches), len(word)
    if lls is None:
        lls = [touch_log_likelihoods(model, t) for t in touches]
    inf = (math.inf, 0.0)
    # cells hold (cost, -score) so tuple min picks fewest edits then best score
    prev = [(j, -j * indel_penalty) for j in range(m + 1)]
    for i in range(1, n + 1):
        cur = [(i, -i * indel_penalty)] + [inf] * m
        ll = lls[i - 1]
        for j in range(1, m + 1):
            c_sub, s_sub = prev[j - 1]
            sub = (c_sub + (literal[i - 1] != word[j - 1]), s_sub - ll.get(word[j - 1], -math.inf))
            dele = (prev[j][0] + 1, prev[j][1] - indel_penalty)
            ins = (cur[j - 1][0] + 1, cur[j - 1][1] - indel_penalty)
            cur[j] = min(sub, dele, ins)
        prev = cur
    cost, neg = prev[m]
    return -neg, cost


def auto_correct(
    word_touches: list,
    model: SpatialModel,
    vocab: Vocabulary,
    max_ed: int = 2,
    literal: str | None = None,
    margin: float = AC_MARGIN,
    indel_penalty: float = INDEL_PENALTY,
    unseen_count: float = UNSEEN_COUNT,
) -> tuple[str, float]:
    """Noisy-channel word correction.

    Every vocabulary word within ``max_ed`` edits of the literal word is scored
    ``log(count/total) + channel_score``; the best replaces the literal only
    when it beats the literal's own score by more than ``margin``. An
    out-of-vocabulary literal gets the prior of ``unseen_count`` occurrences.
    ``literal`` overrides the literal decode (e.g. with a KC result).
    """
    if literal is None:
        literal = literal_decode(word_touches, model.layout)
    if any(isinstance(t, str) for t in word_touches) or len(literal) != len(word_touches):
        return literal, 0.0
    return _auto_correct(
        tuple((t.x, t.y) for t in word_touches), model, vocab, max_ed, literal, margin, indel_penalty, unseen_count
    )


@functools.lru_cache(maxsize=100_000)
def _auto_correct(
    points: tuple, model: SpatialModel, vocab: Vocabulary, max_ed: int, literal: str, margin: float, indel: float, unseen: float
) -> tuple[str, float]:
    # Memoised on the exact touch coordinates; vocabularies are treated as immutable.
    touches = [TouchPoint(x, y) for x, y in points]
    lls = [touch_log_likelihoods(model, t) for t in touches]
    base = vocab.log_prior(literal, unseen) + channel_score(literal, touches, model, literal, indel, lls)[0]
    best_word, best_score = literal, base
    for word, _ in vocab.within(literal, max_ed):
        if word == literal:
            continue
        s = vocab.log_prior(word) + channel_score(word, touches, model, literal, indel, lls)[0]
        if s > best_score or (s == best_score and word < best_word):
            best_word, best_score = word, s
    if best_word != literal and best_score > base + margin:
        return best_word, best_score
    return literal, base


def _restore_case(template: str, word: str) -> str:
    letters = [c for c in template if c.isalpha()]
    if len(letters) > 1 and all(c.isupper() for c in letters):
        return word.upper()
    if letters and letters[0].isupper():
        return word[:1].upper() + word[1:]
    return word


def simulate(
    corrupted: str,
    model: SpatialModel,
    vocab: Vocabulary,
    cfg: SimulatorConfig = SimulatorConfig(),
    rng: np.random.Generator | None = None,
) -> DecodeResult:
    """Run the keyboard decoder over whitespace tokens: encode, literal, KC, then AC.

    Only the alphabetic core of a token is corrected; surrounding punctuation,
    and tokens such as URLs or numbers, keep their literal decode.
    """
    if cfg.touch_noise and rng is None:
        rng = np.random.default_rng(cfg.seed)
    separators: list[str] = []
    per_word: list[WordDecode] = []
    pos = 0
    for m in _TOKEN_RE.finditer(corrupted):
        separators.append(corrupted[pos : m.start()])
        piece = m.group()
        touches = encode_touches(piece, model, rng if cfg.touch_noise else None)
        lit = "".join(
            t if isinstance(t, str) else _case_like(ch, nearest_key(model.layout, t)) for ch, t in zip(piece, touches)
        )
        committed, score = _correct_token(lit, piece, touches, model, vocab, cfg)
        per_word.append(WordDecode(lit, committed, score))
        pos = m.end()
    separators.append(corrupted[pos:])
    literal = _join([w.literal_word for w in per_word], separators)
    corrected = _join([w.committed_word for w in per_word], separators)
    return DecodeResult(literal, corrected, per_word, separators)


def _join(words: list[str], separators: list[str]) -> str:
    parts = [separators[0]]
    for w, sep in zip(words, separators[1:]):
        parts.append(w)
        parts.append(sep)
    return "".join(parts)


def _case_like(template: str, ch: str) -> str:
    return ch.upper() if template.isupper() else ch


def _correct_token(
    lit: str, original: str, touches: list, model: SpatialModel, vocab: Vocabulary, cfg: SimulatorConfig
) -> tuple[str, float]:
    m = _CORE_RE.match(lit)
    if m is None or is_protected(lit) or is_protected(original):
        return lit, 0.0
    lead, core, trail = m.groups()
    if not any(c.isalpha() for c in core):
        return lit, 0.0
    core_touches = touches[len(lead) : len(lead) + len(core)]
    lower = core.lower()
    kc = key_correct(core_touches, model, vocab, cfg.beam_width, cfg.kc_radius)
    word, score = auto_correct(
        core_touches,
        model,
        vocab,
        cfg.max_ed,
        literal=kc,
        margin=cfg.ac_margin,
        indel_penalty=cfg.indel_penalty,
        unseen_count=cfg.unseen_count,
    )
    if word == lower:
        return lit, score
    return lead + _restore_case(original[len(lead) : len(lead) + len(core)], word) + trail, score
