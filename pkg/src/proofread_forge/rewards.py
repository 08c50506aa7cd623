"""Heuristic RL rewards for proofreading candidates.

Training (PPO) is left to an external trainer; this module only scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .judges import Judge
from .metrics import evaluate_example


@dataclass(frozen=True)
class RewardConfig:
    kind: str = "direct"  # "global" | "direct"
    kl_beta: float = 0.0
    combiner: str = "product"  # "product" | "weighted_sum"
    w_grammar: float = 0.5
    w_meaning: float = 0.5

    def __post_init__(self):
        if self.kind not in ("global", "direct"):
            raise ValueError(f"unknown reward kind {self.kind!r}")
        if self.combiner not in ("product", "weighted_sum"):
            raise ValueError(f"unknown combiner {self.combiner!r}")
        if not self.kl_beta >= 0:
            raise ValueError("kl_beta must be non-negative")
        if self.combiner == "weighted_sum":
            if self.w_grammar < 0 or self.w_meaning < 0 or not math.isclose(self.w_grammar + self.w_meaning, 1.0):
                raise ValueError("weighted_sum weights must be non-negative and sum to 1")


@dataclass(frozen=True)
class SequenceLogProbs:
    policy_logp: tuple[float, ...]
    reference_logp: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "policy_logp", tuple(float(x) for x in self.policy_logp))
        object.__setattr__(self, "reference_logp", tuple(float(x) for x in self.reference_logp))
        if len(self.policy_logp) != len(self.reference_logp):
            raise ValueError("policy and reference log-probs must have equal length")
        if not all(math.isfinite(x) for x in self.policy_logp + self.reference_logp):
            raise ValueError("log-probs must be finite")

    def sampled_kl(self) -> float:
        """Single-sample KL estimate: sum of per-token log-ratios."""
        return math.fsum(p - r for p, r in zip(self.policy_logp, self.reference_logp))


def global_reward(source: str, candidate: str, judge: Judge) -> float:
    """1.0 when the judge calls ``candidate`` a good fix of ``source``."""
    return 1.0 if judge.check_good_fix(source, candidate) else 0.0


def direct_reward(
    source: str, candidate: str, targets: Sequence[str], judge: Judge, cfg: RewardConfig = RewardConfig()
) -> float:
    """Grammar and meaning checks against the references, combined into one score.

    With the product combiner this is exactly the per-example Good verdict.
    """
    if not targets:
        raise ValueError("direct reward needs the ground-truth references")
    v = evaluate_example(source, candidate, targets, judge)
    g = 0.0 if v.has_error else 1.0
    m = 0.0 if v.diff_meaning else 1.0
    if cfg.combiner == "product":
        return g * m
    return cfg.w_grammar * g + cfg.w_meaning * m


def kl_regularized_reward(r: float, lp: SequenceLogProbs, kl_beta: float) -> float:
    if kl_beta < 0:
        raise ValueError("kl_beta must be non-negative")
    if kl_beta == 0:
        return r
    return r - kl_beta * lp.sampled_kl()


def score(
    source: str,
    candidate: str,
    targets: Sequence[str],
    judge: Judge,
    cfg: RewardConfig = RewardConfig(),
    lp: SequenceLogProbs | None = None,
) -> float:
    """Reward of the configured kind, KL-regularised when log-probs are given."""
    if cfg.kind == "global":
        r = global_reward(source, candidate, judge)
    else:
        r = direct_reward(source, candidate, targets, judge, cfg)
    return kl_regularized_reward(r, lp, cfg.kl_beta) if lp is not None else r
