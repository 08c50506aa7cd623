from __future__ import annotations

import json
import string

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import multivariate_normal

from proofread_forge.keyboard import (
    DEFAULT_SIGMA,
    QWERTY,
    KeyboardLayout,
    SpatialModel,
    TouchPoint,
    UnknownCharacterError,
    calibrate_sigma,
    key_center,
    literal_error_rate,
    nearest_key,
    nearest_keys,
    sample_touch,
    touch_log_likelihood,
    touch_log_likelihoods,
)

LAYOUT_CHARS = list(QWERTY.chars)
points = st.builds(TouchPoint, st.floats(-1, 11, allow_nan=False), st.floats(-1.5, 4.5, allow_nan=False))


def test_layout_covers_required_characters():
    required = set(string.ascii_lowercase) | set(string.digits) | {" ", "'", ".", ","}
    assert required <= set(QWERTY.keys)
    centers = {(k.x, k.y) for k in QWERTY.keys.values()}
    assert len(centers) == len(QWERTY.keys)
    assert all(k.w > 0 and k.h > 0 for k in QWERTY.keys.values())


def test_key_center_examples():
    assert key_center(QWERTY, "q") == TouchPoint(0.5, 0.5)
    assert key_center(QWERTY, "a") == TouchPoint(0.75, 1.5)
    with pytest.raises(UnknownCharacterError):
        key_center(QWERTY, "€")


def test_nearest_key_examples():
    h, j, k = (key_center(QWERTY, c) for c in "hjk")
    assert nearest_key(QWERTY, h) == "h"
    assert nearest_key(QWERTY, TouchPoint((h.x + j.x) / 2, h.y)) == "h"
    assert nearest_key(QWERTY, TouchPoint(j.x + 0.1 * (k.x - j.x), j.y)) == "j"


@pytest.mark.parametrize("ch", LAYOUT_CHARS)
def test_nearest_key_of_center_is_identity(ch):
    assert nearest_key(QWERTY, key_center(QWERTY, ch)) == ch


def test_sample_touch_zero_sigma_and_determinism():
    zero = SpatialModel(0.0, 0.0)
    assert sample_touch(zero, "g", np.random.default_rng(1)) == key_center(QWERTY, "g")
    m = SpatialModel()
    a = sample_touch(m, "g", np.random.default_rng(42))
    b = sample_touch(m, "g", np.random.default_rng(42))
    assert a == b


def test_sample_touch_unknown_character():
    with pytest.raises(UnknownCharacterError):
        sample_touch(SpatialModel(), "€", np.random.default_rng(0))


def test_default_sigma_miss_rate_for_h():
    # 10^5 samples of 'h' must land off-key 6.5%..10.5% of the time
    rng = np.random.default_rng(2024)
    c = key_center(QWERTY, "h")
    xy = np.array([c.x, c.y]) + rng.standard_normal((100_000, 2)) * DEFAULT_SIGMA
    rate = np.mean(nearest_keys(QWERTY, xy) != QWERTY.chars.index("h"))
    assert 0.065 <= rate <= 0.105


def test_log_likelihood_max_at_center():
    m = SpatialModel()
    p = key_center(QWERTY, "t")
    lls = touch_log_likelihoods(m, p)
    assert max(lls, key=lls.get) == "t"
    assert touch_log_likelihood(m, p, "t") == 0.0


def test_log_likelihood_symmetric_between_h_and_j():
    m = SpatialModel()
    h, j = key_center(QWERTY, "h"), key_center(QWERTY, "j")
    mid = TouchPoint((h.x + j.x) / 2, h.y)
    assert touch_log_likelihood(m, mid, "h") == touch_log_likelihood(m, mid, "j")


def test_letter_ranking_matches_scipy_density():
    m = SpatialModel(0.3, 0.45)
    rng = np.random.default_rng(3)
    letters = string.ascii_lowercase
    for _ in range(20):
        p = TouchPoint(*rng.uniform([0, 0], [10, 3]))
        ours = [touch_log_likelihood(m, p, c) for c in letters]
        oracle = [
            multivariate_normal(mean=[key_center(QWERTY, c).x, key_center(QWERTY, c).y], cov=np.diag([0.09, 0.2025])).logpdf(
                [p.x, p.y]
            )
            for c in letters
        ]
        assert np.argsort(ours, kind="stable").tolist() == np.argsort(oracle, kind="stable").tolist()
        # the shared constant is exactly the normaliser
        assert np.allclose(np.array(ours) - np.array(oracle), ours[0] - oracle[0])


@given(points)
def test_isotropic_argmax_equals_nearest_key(p):
    m = SpatialModel.isotropic(0.37)
    lls = touch_log_likelihoods(m, p)
    best = max(lls.values())
    argmax = min(c for c, v in lls.items() if v == best)
    assert argmax == nearest_key(QWERTY, p)


@given(st.sampled_from(LAYOUT_CHARS), st.integers(0, 2**32 - 1))
def test_sample_touch_is_pure(ch, seed):
    m = SpatialModel()
    assert sample_touch(m, ch, np.random.default_rng(seed)) == sample_touch(m, ch, np.random.default_rng(seed))


def test_negative_sigma_rejected():
    with pytest.raises(ValueError):
        SpatialModel(-0.1, 0.2)


def test_layout_json_round_trip(tmp_path):
    path = tmp_path / "layout.json"
    path.write_text(json.dumps(QWERTY.to_json()))
    loaded = KeyboardLayout.from_json(path)
    assert loaded.keys == QWERTY.keys and loaded.chars == QWERTY.chars


def test_layout_rejects_shared_centers():
    from proofread_forge.keyboard import Key

    with pytest.raises(ValueError):
        KeyboardLayout("bad", {"a": Key("a", 0, 0), "b": Key("b", 0, 0)})


def test_calibrate_sigma_recovers_default(corpus):
    text = " ".join(corpus)
    sigma = calibrate_sigma(text, 0.085, seed=0)
    assert abs(sigma - DEFAULT_SIGMA) < 0.01
    rate = literal_error_rate(SpatialModel.isotropic(sigma), text * 3, np.random.default_rng(9))
    assert abs(rate - 0.085) < 0.005
