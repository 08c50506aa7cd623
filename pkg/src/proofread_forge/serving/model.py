"""Target models for the serving simulator.

``EditChannelModel`` stands in for a served proofreading LLM. It copies its
conditioning input one token per position, prefers the keyboard decoder's
correction where the noisy channel found one, and emits EOS once the input is
exhausted. A small unigram term keeps every logit distinct and finite.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Mapping, Protocol, Sequence, runtime_checkable

import numpy as np

from ..decoder import SimulatorConfig, Vocabulary, simulate
from ..keyboard import SpatialModel

PAD, EOS, UNK = "<pad>", "<eos>", "<unk>"
SPECIALS = (PAD, EOS, UNK)

_CORE = re.compile(r"[A-Za-z0-9](?:[A-Za-z0-9']*[A-Za-z0-9])?")


class Tokenizer:
    """Whitespace word tokens; ids 0, 1, 2 are pad, eos and unk."""

    def __init__(self, tokens: Iterable[str]):
        vocab = list(SPECIALS)
        seen = set(vocab)
        for t in tokens:
            if t not in seen and t.strip() == t and t:
                seen.add(t)
                vocab.append(t)
        self.tokens = vocab
        self.index = {t: i for i, t in enumerate(vocab)}

    pad_id, eos_id, unk_id = 0, 1, 2

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, text: str) -> list[int]:
        return [self.index.get(t, self.unk_id) for t in text.split()]

    def decode(self, ids: Sequence[int], source: Sequence[str] | None = None) -> str:
        """Join tokens with single spaces, dropping pad/eos.

        With ``source`` (the input's surface tokens), an ``<unk>`` at position
        ``i`` is replaced by ``source[i]``.
        """
        out = []
        for i, t in enumerate(ids):
            if t in (self.pad_id, self.eos_id):
                continue
            if t == self.unk_id and source is not None and i < len(source):
                out.append(source[i])
            else:
                out.append(self.tokens[t])
        return " ".join(out)


@runtime_checkable
class TargetModel(Protocol):
    vocab_size: int
    eos_id: int
    pad_id: int

    def next_token_logits(self, prefix: Sequence[int], cond: Sequence[int]) -> np.ndarray: ...

    def parameter_tables(self) -> dict[str, np.ndarray]: ...


def score_positions(model: TargetModel, prefix: Sequence[int], draft: Sequence[int], cond: Sequence[int]) -> np.ndarray:
    """Logits after ``prefix``, ``prefix + draft[:1]``, ... ``prefix + draft``; one target call.

    Uses the model's batched ``score_positions`` when it has one.
    """
    fn = getattr(model, "score_positions", None)
    if fn is not None:
        return fn(prefix, draft, cond)
    seq = list(prefix)
    rows = [model.next_token_logits(seq, cond)]
    for t in draft:
        seq.append(t)
        rows.append(model.next_token_logits(seq, cond))
    return np.stack(rows)


class EditChannelModel:
    """Position-aligned copy model with a per-token correction table.

    Tables (all float64, shape ``(V,)`` unless noted):
      unigram           backoff weight * log prior of each token's word core
      correction_bonus  extra logit for the corrected form of an input token
      copy_bonus        shape (1,), logit bonus for copying the input token
    ``correction_target[v]`` is the token the channel corrects ``v`` to
    (``v`` itself when it stands).
    """

    def __init__(self, tokenizer: Tokenizer, tables: Mapping[str, np.ndarray], correction_target: np.ndarray):
        self.tokenizer = tokenizer
        self.vocab_size = len(tokenizer)
        self.eos_id = tokenizer.eos_id
        self.pad_id = tokenizer.pad_id
        self._tables = {k: np.asarray(v, dtype=np.float64) for k, v in tables.items()}
        for name in ("unigram", "correction_bonus", "copy_bonus"):
            if name not in self._tables:
                raise ValueError(f"missing table {name!r}")
            if not np.all(np.isfinite(self._tables[name])):
                raise ValueError(f"table {name!r} has non-finite entries")
        self.correction_target = np.asarray(correction_target, dtype=np.int64)
        if self._tables["unigram"].shape != (self.vocab_size,) or self.correction_target.shape != (self.vocab_size,):
            raise ValueError("table shapes do not match the vocabulary")

    @classmethod
    def build(
        cls,
        texts: Iterable[str],
        vocab: Vocabulary,
        spatial: SpatialModel,
        sim_cfg: SimulatorConfig = SimulatorConfig(),
        copy_logit_bonus: float = 8.0,
        correction_logit_bonus: float = 3.0,
        backoff_weight: float = 0.1,
        include_vocab: bool = True,
    ) -> "EditChannelModel":
        """Model over the vocabulary words plus every token seen in ``texts``.

        Each distinct input token is run through the keyboard decoder once;
        when the decoder commits a different word, that word becomes the
        token's correction target.
        """
        surface = sorted({t for text in texts for t in text.split()})
        fixes: dict[str, str] = {}
        for tok in surface:
            fixed = simulate(tok, spatial, vocab, sim_cfg).corrected
            if fixed != tok and fixed.split() == [fixed]:
                fixes[tok] = fixed
        words = set(surface) | set(fixes.values())
        if include_vocab:
            words |= set(vocab.words())
        tokenizer = Tokenizer(sorted(words))
        floor = math.log(sim_cfg.unseen_count / max(vocab.total, 1))
        uni = np.empty(len(tokenizer))
        for i, tok in enumerate(tokenizer.tokens):
            m = _CORE.search(tok)
            lp = vocab.log_prior(m.group().lower(), sim_cfg.unseen_count) if m else floor
            uni[i] = backoff_weight * lp
        # pad/unk are never wanted; eos only needs to beat the backoff once the input ends
        uni[[tokenizer.pad_id, tokenizer.unk_id]] = backoff_weight * floor - 5.0
        uni[tokenizer.eos_id] = 0.0
        target = np.arange(len(tokenizer))
        bonus = np.zeros(len(tokenizer))
        for tok, fixed in fixes.items():
            i = tokenizer.index[tok]
            target[i] = tokenizer.index[fixed]
            bonus[i] = correction_logit_bonus
        tables = {"unigram": uni, "correction_bonus": bonus, "copy_bonus": np.array([copy_logit_bonus])}
        return cls(tokenizer, tables, target)

    def parameter_tables(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self._tables.items()}

    def with_tables(self, tables: Mapping[str, np.ndarray]) -> "EditChannelModel":
        return EditChannelModel(self.tokenizer, tables, self.correction_target)

    def _add_position(self, row: np.ndarray, pos: int, cond: Sequence[int]) -> None:
        copy = self._tables["copy_bonus"][0]
        if pos < len(cond):
            x = cond[pos]
            row[x] += copy
            y = self.correction_target[x]
            if y != x:
                row[y] += copy + self._tables["correction_bonus"][x]
        else:
            row[self.eos_id] += copy

    def next_token_logits(self, prefix: Sequence[int], cond: Sequence[int]) -> np.ndarray:
        row = self._tables["unigram"].copy()
        self._add_position(row, len(prefix), _strip_pad(cond, self.pad_id))
        return row

    def score_positions(self, prefix: Sequence[int], draft: Sequence[int], cond: Sequence[int]) -> np.ndarray:
        cond = _strip_pad(cond, self.pad_id)
        rows = np.tile(self._tables["unigram"], (len(draft) + 1, 1))
        for j in range(len(draft) + 1):
            self._add_position(rows[j], len(prefix) + j, cond)
        return rows


class TableModel:
    """Logits read from a fixed ``(max_len + 1, V)`` table by output position.

    Ignores the conditioning input; a convenient toy target for checking
    that speculative sampling reproduces the target distribution.
    """

    def __init__(self, logits: np.ndarray, eos_id: int = 1, pad_id: int = 0):
        self.table = np.asarray(logits, dtype=np.float64)
        self.vocab_size = self.table.shape[1]
        self.eos_id = eos_id
        self.pad_id = pad_id

    def next_token_logits(self, prefix: Sequence[int], cond: Sequence[int]) -> np.ndarray:
        return self.table[min(len(prefix), len(self.table) - 1)].copy()

    def parameter_tables(self) -> dict[str, np.ndarray]:
        return {"logits": self.table.copy()}

    def with_tables(self, tables: Mapping[str, np.ndarray]) -> "TableModel":
        return TableModel(tables["logits"], self.eos_id, self.pad_id)


def _strip_pad(cond: Sequence[int], pad_id: int) -> Sequence[int]:
    n = len(cond)
    while n and cond[n - 1] == pad_id:
        n -= 1
    return cond[:n]
