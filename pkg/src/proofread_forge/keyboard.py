"""Keyboard geometry and the Gaussian touch model.

Coordinates are in key-width units with the origin at the top-left corner of
the ``q`` key. The number row sits above the letter rows (negative ``y``);
comma and period flank the space bar on the bottom row.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

# Isotropic sigma (key widths) giving ~8.5% literal per-letter error on the
# shipped English corpus. Re-derive with ``calibrate_sigma``.
DEFAULT_SIGMA = 0.2537


class UnknownCharacterError(KeyError):
    """Raised for characters that have no key on the layout."""

    def __init__(self, ch: str):
        super().__init__(ch)
        self.ch = ch

    def __str__(self) -> str:
        return f"no key for character {self.ch!r}"


@dataclass(frozen=True)
class Key:
    ch: str
    x: float
    y: float
    w: float = 1.0
    h: float = 1.0


@dataclass(frozen=True)
class TouchPoint:
    x: float
    y: float


TouchSequence = list  # list[TouchPoint | str]; str entries are literal markers


@dataclass(frozen=True)
class KeyboardLayout:
    name: str
    keys: Mapping[str, Key]
    # Derived arrays, sorted by codepoint so argmin ties resolve to the lowest one.
    chars: tuple[str, ...] = field(init=False, repr=False, compare=False)
    centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seen = set()
        for ch, key in self.keys.items():
            if len(ch) != 1 or key.ch != ch:
                raise ValueError(f"bad key entry for {ch!r}")
            if key.w <= 0 or key.h <= 0:
                raise ValueError(f"key {ch!r} must have positive size")
            if not (math.isfinite(key.x) and math.isfinite(key.y)):
                raise ValueError(f"key {ch!r} has non-finite center")
            if (key.x, key.y) in seen:
                raise ValueError(f"key {ch!r} shares a center with another key")
            seen.add((key.x, key.y))
        if not self.keys:
            raise ValueError("layout has no keys")
        chars = tuple(sorted(self.keys))
        centers = np.array([[self.keys[c].x, self.keys[c].y] for c in chars], dtype=float)
        centers.setflags(write=False)
        object.__setattr__(self, "keys", dict(self.keys))
        object.__setattr__(self, "chars", chars)
        object.__setattr__(self, "centers", centers)

    def __contains__(self, ch: str) -> bool:
        return ch in self.keys

    def __hash__(self) -> int:
        return hash((self.name, self.chars))

    @classmethod
    def from_json(cls, path: str | Path) -> "KeyboardLayout":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        keys = {
            k["ch"]: Key(k["ch"], float(k["x"]), float(k["y"]), float(k.get("w", 1.0)), float(k.get("h", 1.0)))
            for k in data["keys"]
        }
        return cls(name=data["name"], keys=keys)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "keys": [{"ch": k.ch, "x": k.x, "y": k.y, "w": k.w, "h": k.h} for k in self.keys.values()],
        }


def qwerty() -> KeyboardLayout:
    """US QWERTY with rows staggered by 0.25 and 0.75 key widths."""
    keys: dict[str, Key] = {}
    for i, ch in enumerate("1234567890"):
        keys[ch] = Key(ch, 0.5 + i, -0.5)
    for row, (offset, letters) in enumerate([(0.0, "qwertyuiop"), (0.25, "asdfghjkl'"), (0.75, "zxcvbnm")]):
        for i, ch in enumerate(letters):
            keys[ch] = Key(ch, offset + 0.5 + i, row + 0.5)
    keys[","] = Key(",", 2.0, 3.5)
    keys[" "] = Key(" ", 5.0, 3.5, w=5.0)
    keys["."] = Key(".", 8.0, 3.5)
    return KeyboardLayout(name="qwerty-us", keys=keys)


QWERTY = qwerty()


def fold(ch: str, layout: KeyboardLayout) -> str | None:
    """Layout character used to type ``ch`` (lowercase folding), or None."""
    if ch in layout.keys:
        return ch
    low = ch.lower()
    if len(low) == 1 and low in layout.keys:
        return low
    return None


def match_case(template: str, ch: str) -> str:
    return ch.upper() if template.isupper() else ch


def key_center(layout: KeyboardLayout, ch: str) -> TouchPoint:
    try:
        key = layout.keys[ch]
    except KeyError:
        raise UnknownCharacterError(ch) from None
    return TouchPoint(key.x, key.y)


def nearest_key(layout: KeyboardLayout, p: TouchPoint) -> str:
    d2 = (layout.centers[:, 0] - p.x) ** 2 + (layout.centers[:, 1] - p.y) ** 2
    return layout.chars[int(np.argmin(d2))]


def nearest_keys(layout: KeyboardLayout, xy: np.ndarray) -> np.ndarray:
    """Vectorised ``nearest_key`` for an ``(n, 2)`` array; returns indices into ``layout.chars``."""
    diff = xy[:, None, :] - layout.centers[None, :, :]
    return np.argmin((diff**2).sum(axis=-1), axis=1)


@dataclass(frozen=True)
class SpatialModel:
    sigma_x: float = DEFAULT_SIGMA
    sigma_y: float = DEFAULT_SIGMA
    layout: KeyboardLayout = QWERTY

    def __post_init__(self):
        if not (self.sigma_x >= 0 and self.sigma_y >= 0):
            raise ValueError("sigma must be non-negative")

    @classmethod
    def isotropic(cls, sigma: float, layout: KeyboardLayout = QWERTY) -> "SpatialModel":
        return cls(sigma, sigma, layout)

    def with_sigma(self, sigma: float) -> "SpatialModel":
        return SpatialModel(sigma, sigma, self.layout)


def sample_touch(model: SpatialModel, ch: str, rng: np.random.Generator) -> TouchPoint:
    c = key_center(model.layout, ch)
    dx, dy = rng.standard_normal(2)
    return TouchPoint(c.x + model.sigma_x * dx, c.y + model.sigma_y * dy)


def touch_log_likelihood(model: SpatialModel, p: TouchPoint, ch: str) -> float:
    """Gaussian log-density of ``p`` around ``ch``'s key, minus the shared normaliser.

    The value is 0 at the key center. A zero sigma degenerates to 0 at the
    center and ``-inf`` anywhere else on that axis.
    """
    c = key_center(model.layout, ch)
    return _axis_term(p.x - c.x, model.sigma_x) + _axis_term(p.y - c.y, model.sigma_y)


def _axis_term(d: float, sigma: float) -> float:
    if sigma == 0:
        return 0.0 if d == 0 else -math.inf
    return -0.5 * (d / sigma) ** 2


def touch_log_likelihoods(model: SpatialModel, p: TouchPoint) -> dict[str, float]:
    """``touch_log_likelihood`` for every key at once."""
    c = model.layout.centers
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = [_axis_terms(p.x - c[:, 0], model.sigma_x), _axis_terms(p.y - c[:, 1], model.sigma_y)]
    ll = terms[0] + terms[1]
    return dict(zip(model.layout.chars, ll.tolist()))


def _axis_terms(d: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0:
        return np.where(d == 0, 0.0, -np.inf)
    return -0.5 * (d / sigma) ** 2


def literal_error_rate(model: SpatialModel, text: str, rng: np.random.Generator, letters_only: bool = True) -> float:
    """Monte-Carlo rate at which a touch for a character lands on another key."""
    layout = model.layout
    index = {c: i for i, c in enumerate(layout.chars)}
    chars = [fold(ch, layout) for ch in text]
    chars = [c for c in chars if c is not None and (c.isalpha() or not letters_only)]
    if not chars:
        raise ValueError("no typeable characters in sample")
    ids = np.array([index[c] for c in chars])
    xy = layout.centers[ids] + rng.standard_normal((len(ids), 2)) * [model.sigma_x, model.sigma_y]
    return float(np.mean(nearest_keys(layout, xy) != ids))


def calibrate_sigma(
    text: str,
    target: float = 0.085,
    seed: int = 0,
    layout: KeyboardLayout = QWERTY,
    lo: float = 0.01,
    hi: float = 1.0,
    iters: int = 30,
) -> float:
    """Bisection for the isotropic sigma whose literal letter error rate hits ``target``.

    Every evaluation reuses the same standard-normal draws, so the error curve
    is monotone in sigma and the bisection is well posed.
    """
    chars = [fold(ch, layout) for ch in text]
    chars = [c for c in chars if c is not None and c.isalpha()]
    if not chars:
        raise ValueError("no letters in calibration text")
    index = {c: i for i, c in enumerate(layout.chars)}
    ids = np.array([index[c] for c in chars])
    noise = np.random.default_rng(seed).standard_normal((len(ids), 2))
    centers = layout.centers[ids]

    def rate(sigma: float) -> float:
        return float(np.mean(nearest_keys(layout, centers + sigma * noise) != ids))

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if rate(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
