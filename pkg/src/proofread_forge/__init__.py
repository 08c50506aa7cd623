"""Synthetic keyboard-typo proofreading data, decoding, evaluation, rewards and serving."""

from .corruption import CorruptionConfig, Edit, Operator, apply_operator, corrupt, make_rng, replay
from .decoder import DecodeResult, SimulatorConfig, Vocabulary, simulate
from .judges import FilterVerdict, HttpJudge, JudgeError, RuleJudge, make_judge
from .keyboard import DEFAULT_SIGMA, QWERTY, KeyboardLayout, SpatialModel, TouchPoint, calibrate_sigma
from .metrics import MetricsReport, evaluate_corpus, evaluate_example
from .pipeline import PipelineConfig, ProofreadExample, build_dataset
from .rewards import RewardConfig, SequenceLogProbs, direct_reward, global_reward, kl_regularized_reward

__version__ = "0.1.0"

__all__ = [
    "CorruptionConfig",
    "DEFAULT_SIGMA",
    "DecodeResult",
    "Edit",
    "FilterVerdict",
    "HttpJudge",
    "JudgeError",
    "KeyboardLayout",
    "MetricsReport",
    "Operator",
    "PipelineConfig",
    "ProofreadExample",
    "QWERTY",
    "RewardConfig",
    "RuleJudge",
    "SequenceLogProbs",
    "SimulatorConfig",
    "SpatialModel",
    "TouchPoint",
    "Vocabulary",
    "apply_operator",
    "build_dataset",
    "calibrate_sigma",
    "corrupt",
    "direct_reward",
    "evaluate_corpus",
    "evaluate_example",
    "global_reward",
    "kl_regularized_reward",
    "make_judge",
    "make_rng",
    "replay",
    "simulate",
]
