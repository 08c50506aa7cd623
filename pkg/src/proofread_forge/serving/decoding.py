"""Autoregressive and input-drafted speculative decoding.

The speculative decoder drafts from the request's own input: after each
verification pass it re-anchors the input against what has been emitted so far
(minimal edit distance) and proposes the next ``max_draft_len`` input tokens.
In sampling mode each draft position is a point mass smoothed with ``epsilon``
uniform mass, verified with the usual ``min(1, p/q)`` test and residual
resampling, so the output distribution is the target's. Greedy mode accepts
while the draft equals the target argmax.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .model import TargetModel, _strip_pad, score_positions
from .segmentation import ServingConfig


@dataclass(frozen=True)
class StepRecord:
    draft_len: int
    accepted_len: int
    # token emitted by the target itself this step (resample or bonus); None if none
    resampled_token: int | None

    def to_dict(self) -> dict:
        return {"draft_len": self.draft_len, "accepted_len": self.accepted_len, "resampled_token": self.resampled_token}


@dataclass
class SpecDecodeTrace:
    steps: list[StepRecord] = field(default_factory=list)
    total_target_calls: int = 0
    total_tokens: int = 0  # emitted tokens, EOS included
    wall_time: float = 0.0  # seconds

    @property
    def accepted_lengths(self) -> list[int]:
        return [s.accepted_len for s in self.steps]

    def conserved(self) -> bool:
        return sum(s.accepted_len + (s.resampled_token is not None) for s in self.steps) == self.total_tokens

    def to_dict(self) -> dict:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "total_target_calls": self.total_target_calls,
            "total_tokens": self.total_tokens,
            "wall_time": self.wall_time,
        }


class Drafter(Protocol):
    def propose(self, out: Sequence[int], cond: Sequence[int], k: int, eos_id: int) -> list[int]: ...


def align_anchor(out: Sequence[int], cond: Sequence[int]) -> int:
    """Input index ``j`` minimising edit distance between ``out`` and ``cond[:j]``.

    Ties go to the ``j`` closest to ``len(out)``, then to the larger ``j``.
    """
    m = len(out)
    n = len(cond)
    row = list(range(n + 1))
    for i in range(1, m + 1):
        prev = row
        row = [i] + [0] * n
        a = out[i - 1]
        for j in range(1, n + 1):
            row[j] = min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + (a != cond[j - 1]))
    best = min(row)
    return min((j for j in range(n + 1) if row[j] == best), key=lambda j: (abs(j - m), -j))


class InputDrafter:
    """Drafts the unconsumed input suffix, followed by EOS when it fits."""

    def propose(self, out: Sequence[int], cond: Sequence[int], k: int, eos_id: int) -> list[int]:
        j = align_anchor(out, cond)
        draft = list(cond[j : j + k])
        if len(draft) < k:
            draft.append(eos_id)
        return draft


def _probs(logits: np.ndarray, temperature: float) -> np.ndarray:
    z = logits / temperature
    z = z - z.max()
    p = np.exp(z)
    return p / p.sum()


def _cap(cfg: ServingConfig, cond: Sequence[int]) -> int:
    return cfg.max_new_tokens if cfg.max_new_tokens is not None else 2 * len(cond) + 2


def _pick(logits: np.ndarray, cfg: ServingConfig, rng: np.random.Generator) -> int:
    if cfg.greedy:
        return int(np.argmax(logits))
    p = _probs(logits, cfg.temperature)
    return int(rng.choice(len(p), p=p))


def _finish(out: list[int], eos_id: int) -> list[int]:
    return out[:-1] if out and out[-1] == eos_id else out


def autoregressive_decode(
    model: TargetModel, input_tokens: Sequence[int], cfg: ServingConfig, rng: np.random.Generator | None = None
) -> tuple[list[int], SpecDecodeTrace]:
    """One target call per emitted token; returns tokens without the final EOS."""
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    cond = list(_strip_pad(list(input_tokens), model.pad_id))
    cap = _cap(cfg, cond)
    trace = SpecDecodeTrace()
    t0 = time.perf_counter()
    out: list[int] = []
    while len(out) < cap:
        logits = model.next_token_logits(out, cond)
        trace.total_target_calls += 1
        tok = _pick(logits, cfg, rng)
        out.append(tok)
        trace.steps.append(StepRecord(0, 0, tok))
        if tok == model.eos_id:
            break
    trace.total_tokens = len(out)
    trace.wall_time = time.perf_counter() - t0
    return _finish(out, model.eos_id), trace


def speculative_decode(
    model: TargetModel,
    input_tokens: Sequence[int],
    cfg: ServingConfig,
    rng: np.random.Generator | None = None,
    drafter: Drafter | None = None,
) -> tuple[list[int], SpecDecodeTrace]:
    """Verify input-derived drafts in one target call per step."""
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    drafter = drafter or InputDrafter()
    cond = list(_strip_pad(list(input_tokens), model.pad_id))
    cap = _cap(cfg, cond)
    eos = model.eos_id
    V = model.vocab_size
    eps = cfg.epsilon
    trace = SpecDecodeTrace()
    t0 = time.perf_counter()
    out: list[int] = []
    while len(out) < cap and not (out and out[-1] == eos):
        proposal = drafter.propose(_finish(out, eos), cond, cfg.max_draft_len, eos)
        proposal = proposal[: min(cfg.max_draft_len, cap - len(out))]
        if cfg.greedy:
            draft = proposal
        else:
            # sample the draft from the smoothed point mass so the test below is exact
            swap = rng.random(len(proposal)) < eps
            draft = [int(rng.integers(V)) if s else d for d, s in zip(proposal, swap)]
        logits = score_positions(model, out, draft, cond)
        trace.total_target_calls += 1
        accepted = 0
        emitted: int | None = None
        for i, d in enumerate(draft):
            if cfg.greedy:
                top = int(np.argmax(logits[i]))
                ok = d == top
            else:
                p = _probs(logits[i], cfg.temperature)
                q_d = eps / V + (1.0 - eps if d == proposal[i] else 0.0)
                ok = rng.random() < min(1.0, p[d] / q_d)
            if ok:
                out.append(d)
                accepted += 1
                if d == eos:
                    break
                continue
            if cfg.greedy:
                emitted = top
            else:
                q = np.full(V, eps / V)
                q[proposal[i]] += 1.0 - eps
                resid = np.maximum(p - q, 0.0)
                total = resid.sum()
                emitted = int(rng.choice(V, p=resid / total)) if total > 0 else int(rng.choice(V, p=p))
            out.append(emitted)
            break
        else:
            # every draft token accepted: the last row gives a free extra token
            if len(out) < cap and not (out and out[-1] == eos):
                emitted = _pick(logits[len(draft)], cfg, rng)
                out.append(emitted)
        trace.steps.append(StepRecord(len(draft), accepted, emitted))
    trace.total_tokens = len(out)
    trace.wall_time = time.perf_counter() - t0
    return _finish(out, eos), trace
