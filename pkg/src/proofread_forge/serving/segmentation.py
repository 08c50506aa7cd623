"""Length buckets and paragraph/sentence segmentation for serving."""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class OverLengthError(ValueError):
    """Input longer than the largest bucket; segment it first."""


@dataclass(frozen=True)
class ServingConfig:
    bucket_keys: tuple[int, ...] = (16, 32, 64, 128)
    temperature: float = 0.3
    max_draft_len: int = 8
    seed: int = 0
    greedy: bool = False
    # mass spread uniformly over the vocabulary to smooth point-mass drafts
    epsilon: float = 1e-6
    # output cap in tokens (including EOS); default 2 * input + 2
    max_new_tokens: int | None = None
    jobs: int = 1
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        keys = tuple(int(k) for k in self.bucket_keys)
        if not keys or any(k <= 0 for k in keys) or any(a >= b for a, b in zip(keys, keys[1:])):
            raise ValueError(f"bucket keys must be positive and strictly increasing, got {keys}")
        object.__setattr__(self, "bucket_keys", keys)
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if self.max_draft_len < 1:
            raise ValueError("max_draft_len must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must be in (0, 1)")

    @property
    def max_bucket(self) -> int:
        return self.bucket_keys[-1]


def pick_bucket(cfg: ServingConfig, token_len: int) -> int:
    """Smallest bucket key that fits ``token_len`` tokens."""
    if token_len < 0:
        raise ValueError("token_len must be >= 0")
    for key in cfg.bucket_keys:
        if token_len <= key:
            return key
    raise OverLengthError(f"{token_len} tokens exceed the largest bucket ({cfg.max_bucket})")


def pad_to_bucket(tokens: list[int], cfg: ServingConfig, pad_id: int) -> list[int]:
    return list(tokens) + [pad_id] * (pick_bucket(cfg, len(tokens)) - len(tokens))


@dataclass(frozen=True)
class Segment:
    text: str
    sep: str = ""  # whitespace that followed this segment in the document

    @property
    def n_tokens(self) -> int:
        return len(self.text.split())


_PARAGRAPH_RE = re.compile(r"(\n\s*)")
_SENTENCE_RE = re.compile(r"(?<=[.!?])(\s+)")
_WORD_RE = re.compile(r"(\S+)(\s*)")


def segment(document: str, cfg: ServingConfig = ServingConfig()) -> list[Segment]:
    """Split into paragraphs at newlines; paragraphs over the largest bucket are
    split at sentence ends, and over-long sentences at word boundaries.

    ``rejoin(segment(d)) == d`` for every document.
    """
    if not document:
        return []
    parts = _PARAGRAPH_RE.split(document)
    out: list[Segment] = []
    for i in range(0, len(parts), 2):
        text = parts[i]
        sep = parts[i + 1] if i + 1 < len(parts) else ""
        if len(text.split()) <= cfg.max_bucket:
            out.append(Segment(text, sep))
        else:
            out.extend(_split_long(text, sep, cfg.max_bucket))
    return out


def rejoin(segments: list[Segment]) -> str:
    return "".join(s.text + s.sep for s in segments)


def _split_long(text: str, sep: str, limit: int) -> list[Segment]:
    lead = text[: len(text) - len(text.lstrip())]
    body = text[len(lead) :]
    pieces = _SENTENCE_RE.split(body)
    units: list[tuple[str, str]] = []
    for j in range(0, len(pieces), 2):
        sent = pieces[j]
        ssep = pieces[j + 1] if j + 1 < len(pieces) else ""
        if len(sent.split()) <= limit:
            units.append((sent, ssep))
        else:
            words = _WORD_RE.findall(sent)
            for k, (w, wsep) in enumerate(words):
                units.append((w, wsep if k + 1 < len(words) else wsep + ssep))
    if lead:
        units[0] = (lead + units[0][0], units[0][1])
    units[-1] = (units[-1][0], units[-1][1] + sep)
    return _pack(units, limit)


def _pack(units: list[tuple[str, str]], limit: int) -> list[Segment]:
    """Greedily merge consecutive units while the token count stays within ``limit``."""
    out: list[Segment] = []
    cur: list[tuple[str, str]] = []
    count = 0
    for text, sep in units:
        n = len(text.split())
        if cur and count + n > limit:
            out.append(_merge(cur))
            cur, count = [], 0
        cur.append((text, sep))
        count += n
    if cur:
        out.append(_merge(cur))
    return out


def _merge(units: list[tuple[str, str]]) -> Segment:
    body = "".join(t + s for t, s in units[:-1]) + units[-1][0]
    return Segment(body, units[-1][1])
