"""Keyboard typo synthesis: six character-level error operators."""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .keyboard import QWERTY, SpatialModel, fold, key_center, match_case, nearest_keys


class Operator(str, enum.Enum):
    OMIT = "omit"
    INSERT = "insert"
    TRANSPOSE = "transpose"
    DOUBLE_TAP = "double_tap"
    OMIT_DOUBLE = "omit_double"
    POSITIONAL = "positional"


OPERATORS = tuple(Operator)


class InvalidPositionError(ValueError):
    pass


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, *path)``; e.g. ``make_rng(seed, line_index)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=path)))


@dataclass(frozen=True)
class CorruptionConfig:
    p_omit: float = 0.01
    p_insert: float = 0.01
    p_transpose: float = 0.01
    p_double_tap: float = 0.005
    p_omit_double: float = 0.005
    p_positional: float = 0.05
    spatial: SpatialModel = field(default_factory=SpatialModel)
    seed: int = 0
    insert_mode: str = "adjacent"  # or "uniform"

    def __post_init__(self):
        probs = self.probabilities()
        for op, p in probs.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p_{op.value} must be in [0, 1], got {p}")
        if sum(probs.values()) > 1.0 + 1e-12:
            raise ValueError("operator probabilities must sum to at most 1")
        if self.insert_mode not in ("adjacent", "uniform"):
            raise ValueError(f"unknown insert_mode {self.insert_mode!r}")

    def probabilities(self) -> dict[Operator, float]:
        return {op: getattr(self, f"p_{op.value}") for op in OPERATORS}

    @property
    def total(self) -> float:
        return sum(self.probabilities().values())

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "spatial"}
        d["sigma_x"] = self.spatial.sigma_x
        d["sigma_y"] = self.spatial.sigma_y
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "CorruptionConfig":
        data = dict(data)
        sx = data.pop("sigma_x", data.pop("sigma", None))
        sy = data.pop("sigma_y", sx)
        kwargs = {}
        if sx is not None:
            kwargs["spatial"] = SpatialModel(float(sx), float(sy))
        known = {f for f in cls.__dataclass_fields__ if f != "spatial"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown corruption config keys: {sorted(unknown)}")
        return cls(**data, **kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "CorruptionConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class Edit:
    position: int
    operator: Operator
    original: str
    emitted: str

    def to_dict(self) -> dict:
        return {"position": self.position, "operator": self.operator.value, "original": self.original, "emitted": self.emitted}

    @classmethod
    def from_dict(cls, d: dict) -> "Edit":
        return cls(d["position"], Operator(d["operator"]), d["original"], d["emitted"])


EditLog = list  # list[Edit]


def replay(source: str, log: list[Edit]) -> str:
    """Re-apply an edit log to its source string."""
    out = []
    i = 0
    for e in log:
        if e.position < i or source[e.position : e.position + len(e.original)] != e.original:
            raise ValueError(f"edit log does not match source at {e.position}")
        out.append(source[i : e.position])
        out.append(e.emitted)
        i = e.position + len(e.original)
    out.append(source[i:])
    return "".join(out)


def _miss_touch(spatial: SpatialModel, ch: str, rng: np.random.Generator, batch: int = 64, rounds: int = 64) -> str:
    """Key hit by a touch aimed at ``ch`` conditioned on missing it.

    Rejection-samples the Gaussian; with zero sigma (or extreme bad luck) falls
    back to the nearest other key.
    """
    layout = spatial.layout
    target = layout.chars.index(ch)
    c = key_center(layout, ch)
    scale = np.array([spatial.sigma_x, spatial.sigma_y])
    if scale.any():
        for _ in range(rounds):
            xy = np.array([c.x, c.y]) + rng.standard_normal((batch, 2)) * scale
            hits = nearest_keys(layout, xy)
            miss = np.nonzero(hits != target)[0]
            if miss.size:
                return layout.chars[int(hits[miss[0]])]
    d2 = ((layout.centers - [c.x, c.y]) ** 2).sum(axis=1)
    d2[target] = np.inf
    return layout.chars[int(np.argmin(d2))]


def _letters(spatial: SpatialModel) -> list[str]:
    return [ch for ch in spatial.layout.chars if ch.isalpha()]


def _applicable(op: Operator, text: str, pos: int, spatial: SpatialModel) -> bool:
    layout = spatial.layout
    if not 0 <= pos < len(text) or fold(text[pos], layout) is None:
        return False
    if op is Operator.TRANSPOSE:
        return pos + 1 < len(text) and fold(text[pos + 1], layout) is not None and text[pos] != text[pos + 1]
    if op is Operator.OMIT_DOUBLE:
        return pos + 1 < len(text) and text[pos] == text[pos + 1]
    return True


def _emit(
    op: Operator,
    text: str,
    pos: int,
    spatial: SpatialModel,
    rng: np.random.Generator,
    insert_mode: str = "adjacent",
) -> tuple[str, str]:
    """(original span consumed at ``pos``, replacement emitted for it)."""
    ch = text[pos]
    if op is Operator.OMIT:
        return ch, ""
    if op is Operator.DOUBLE_TAP:
        return ch, ch + ch
    if op is Operator.TRANSPOSE:
        return text[pos : pos + 2], text[pos + 1] + ch
    if op is Operator.OMIT_DOUBLE:
        return text[pos : pos + 2], ch
    key = fold(ch, spatial.layout)
    if op is Operator.POSITIONAL:
        return ch, match_case(ch, _miss_touch(spatial, key, rng))
    # insertion lands before ``ch``
    if insert_mode == "uniform":
        letters = _letters(spatial)
        extra = letters[int(rng.integers(len(letters)))]
    else:
        extra = _miss_touch(spatial, key, rng)
    return ch, match_case(ch, extra) + ch


def apply_operator(
    op: Operator | str,
    text: str,
    pos: int,
    spatial: SpatialModel | None = None,
    rng: np.random.Generator | None = None,
    insert_mode: str = "adjacent",
) -> str:
    """Apply exactly one operator at ``pos``."""
    op = Operator(op)
    spatial = spatial or SpatialModel(layout=QWERTY)
    if not _applicable(op, text, pos, spatial):
        raise InvalidPositionError(f"{op.value} cannot apply at position {pos} of {text!r}")
    rng = rng if rng is not None else np.random.default_rng()
    original, emitted = _emit(op, text, pos, spatial, rng, insert_mode)
    return text[:pos] + emitted + text[pos + len(original) :]


def corrupt(text: str, config: CorruptionConfig, rng: np.random.Generator | None = None) -> tuple[str, list[Edit]]:
    """Single left-to-right pass drawing one outcome per character.

    Each typeable character draws from the categorical over the operators that
    can apply there plus a no-op; inapplicable operators' mass falls to no-op.
    The positional rate is divided by the key's width.
    Without an explicit ``rng`` the stream is seeded from ``config.seed``.
    """
    rng = rng if rng is not None else make_rng(config.seed)
    probs = config.probabilities()
    spatial = config.spatial
    out: list[str] = []
    log: list[Edit] = []
    i = 0
    n = len(text)
    while i < n:
        if fold(text[i], spatial.layout) is None:
            out.append(text[i])
            i += 1
            continue
        u = rng.random()
        chosen = None
        acc = 0.0
        for op in OPERATORS:
            p = probs[op]
            if op is Operator.POSITIONAL:
                # wide keys (the space bar) are proportionally harder to miss
                p /= spatial.layout.keys[fold(text[i], spatial.layout)].w
            if p and _applicable(op, text, i, spatial):
                acc += p
                if u < acc:
                    chosen = op
                    break
        if chosen is None:
            out.append(text[i])
            i += 1
            continue
        original, emitted = _emit(chosen, text, i, spatial, rng, config.insert_mode)
        log.append(Edit(i, chosen, original, emitted))
        out.append(emitted)
        i += len(original)
    return "".join(out), log
