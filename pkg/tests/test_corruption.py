from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from proofread_forge.corruption import (
    OPERATORS,
    CorruptionConfig,
    Edit,
    InvalidPositionError,
    Operator,
    apply_operator,
    corrupt,
    make_rng,
    replay,
)
from proofread_forge.keyboard import QWERTY, SpatialModel, fold, key_center
from proofread_forge.text import edit_distance

ZERO = dict(p_omit=0, p_insert=0, p_transpose=0, p_double_tap=0, p_omit_double=0, p_positional=0)


def only(op: Operator, p: float, **kw) -> CorruptionConfig:
    return CorruptionConfig(**{**ZERO, f"p_{op.value}": p}, **kw)


def neighbours(ch: str, radius: float = 1.5) -> set[str]:
    c = key_center(QWERTY, ch)
    return {
        k for k, key in QWERTY.keys.items() if k != ch and math.hypot(key.x - c.x, key.y - c.y) <= radius and key.w == 1
    }


@pytest.mark.parametrize(
    "op,pos,expected",
    [
        (Operator.OMIT, 1, "hllo"),
        (Operator.TRANSPOSE, 1, "hlelo"),
        (Operator.DOUBLE_TAP, 1, "heello"),
        (Operator.OMIT_DOUBLE, 2, "helo"),
    ],
)
def test_deterministic_operator_examples(op, pos, expected):
    assert apply_operator(op, "hello", pos) == expected


def test_insertion_adds_a_neighbouring_key():
    seen = set()
    for seed in range(200):
        out = apply_operator(Operator.INSERT, "hello", 1, SpatialModel(), make_rng(seed))
        assert len(out) == 6 and out[0] == "h" and out[2:] == "ello"
        assert out[1] in neighbours("e")
        seen.add(out[1])
    assert len(seen) >= 3


def test_positional_error_hits_a_neighbour_and_can_give_jello():
    outs = {apply_operator(Operator.POSITIONAL, "hello", 0, SpatialModel(), make_rng(s)) for s in range(300)}
    assert "jello" in outs
    for out in outs:
        assert out[1:] == "ello" and out[0] in neighbours("h")


def test_positional_with_zero_sigma_falls_back_to_nearest_other_key():
    out = apply_operator(Operator.POSITIONAL, "hello", 0, SpatialModel(0.0, 0.0), make_rng(0))
    assert out == "gello"  # g and j tie at distance 1; g has the lower codepoint


@pytest.mark.parametrize(
    "op,text,pos",
    [
        (Operator.TRANSPOSE, "hello", 4),
        (Operator.TRANSPOSE, "hello", 2),  # 'l' 'l' swap is not an edit
        (Operator.OMIT_DOUBLE, "hello", 1),
        (Operator.OMIT, "hello", 5),
        (Operator.OMIT, "hello", -1),
        (Operator.POSITIONAL, "h!llo", 1),
    ],
)
def test_invalid_positions(op, text, pos):
    with pytest.raises(InvalidPositionError):
        apply_operator(op, text, pos)


def test_corrupt_examples():
    text = "The quick brown fox jumps over the lazy dog."
    assert corrupt(text, CorruptionConfig(**ZERO)) == (text, [])
    cfg = CorruptionConfig(seed=11)
    assert corrupt(text, cfg) == corrupt(text, cfg)
    assert corrupt("hello", only(Operator.OMIT, 1.0))[0] == ""
    assert corrupt("", cfg) == ("", [])


def test_edited_fraction_tracks_configured_total(corpus):
    text = (" ".join(corpus) * 3)[:10_000]
    cfg = CorruptionConfig()
    fracs = []
    for seed in range(5):
        _, log = corrupt(text, cfg, make_rng(seed))
        fracs.append(sum(len(e.original) for e in log) / len(text))
    assert abs(np.mean(fracs) - cfg.total) <= 0.02


def _chunked_distance(text: str, cfg: CorruptionConfig, seed: int, chunk: int = 100) -> np.ndarray:
    out = []
    for i in range(0, len(text), chunk):
        piece = text[i : i + chunk]
        noisy, _ = corrupt(piece, cfg, make_rng(seed, i))
        out.append(edit_distance(piece, noisy))
    return np.array(out, dtype=float)


@pytest.mark.parametrize("op", OPERATORS)
def test_monotone_degradation(op, corpus):
    text = (" ".join(corpus) * 3)[:10_000]
    levels = (0.1, 0.5, 1.0) if op is Operator.OMIT_DOUBLE else (0.02, 0.1, 0.3)
    intervals = []
    for p in levels:
        d = _chunked_distance(text, only(op, p), seed=5)
        half = 1.96 * d.std(ddof=1) / math.sqrt(len(d))
        intervals.append((d.mean() - half, d.mean() + half))
    for lo_level, hi_level in zip(intervals, intervals[1:]):
        assert lo_level[1] < hi_level[0], intervals


text_st = st.text(alphabet=st.sampled_from(list("abcdefghijklmnopqrstuvwxyz ',.ABCXYZ!?é😀\n")), max_size=80)


@given(text_st, st.integers(0, 2**31))
def test_replay_reproduces_output(text, seed):
    cfg = CorruptionConfig(p_omit=0.1, p_insert=0.1, p_transpose=0.1, p_double_tap=0.1, p_omit_double=0.1, p_positional=0.2)
    noisy, log = corrupt(text, cfg, make_rng(seed))
    assert replay(text, log) == noisy
    positions = [e.position for e in log]
    assert positions == sorted(positions)


@given(text_st, st.integers(0, 2**31))
def test_off_layout_characters_untouched(text, seed):
    cfg = CorruptionConfig(p_omit=0.15, p_insert=0.15, p_transpose=0.15, p_double_tap=0.15, p_omit_double=0.15, p_positional=0.25)
    noisy, log = corrupt(text, cfg, make_rng(seed))
    for e in log:
        assert all(fold(c, QWERTY) is not None for c in e.original + e.emitted)
    keep = [c for c in text if fold(c, QWERTY) is None]
    assert [c for c in noisy if fold(c, QWERTY) is None] == keep


def test_config_validation_and_json(tmp_path):
    with pytest.raises(ValueError):
        CorruptionConfig(p_omit=1.5)
    with pytest.raises(ValueError):
        CorruptionConfig(p_omit=0.6, p_positional=0.6)
    with pytest.raises(ValueError):
        CorruptionConfig.from_dict({"p_bogus": 0.1})
    cfg = CorruptionConfig(p_omit=0.02, seed=9, spatial=SpatialModel(0.3, 0.4))
    path = tmp_path / "c.json"
    import json

    path.write_text(json.dumps(cfg.to_dict()))
    assert CorruptionConfig.from_json(path) == cfg


def test_edit_round_trip_and_bad_replay():
    e = Edit(1, Operator.OMIT, "e", "")
    assert Edit.from_dict(e.to_dict()) == e
    with pytest.raises(ValueError):
        replay("hello", [Edit(1, Operator.OMIT, "x", "")])


def test_uniform_insert_mode_uses_letters():
    cfg = only(Operator.INSERT, 1.0, insert_mode="uniform", seed=3)
    noisy, log = corrupt("abc", cfg)
    assert len(noisy) == 6 and all(e.emitted[0].isalpha() for e in log)
