"""Independent reference implementations used by the tests."""

from __future__ import annotations

import functools
import math

import numpy as np

from proofread_forge.keyboard import key_center
from proofread_forge.text import edit_distance


def gaussian_ll(model, p, ch) -> float:
    c = key_center(model.layout, ch)
    return -0.5 * ((p.x - c.x) / model.sigma_x) ** 2 - 0.5 * ((p.y - c.y) / model.sigma_y) ** 2


def channel(word: str, literal: str, touches, model, indel: float) -> tuple[int, float]:
    """(min edit cost, best touch score among min-cost alignments), top-down recursion."""

    @functools.lru_cache(maxsize=None)
    def best(i: int, j: int) -> tuple[int, float]:
        if i == 0 and j == 0:
            return 0, 0.0
        options = []
        if i > 0 and j > 0:
            c, s = best(i - 1, j - 1)
            options.append((c + (literal[i - 1] != word[j - 1]), s + gaussian_ll(model, touches[i - 1], word[j - 1])))
        if i > 0:
            c, s = best(i - 1, j)
            options.append((c + 1, s + indel))
        if j > 0:
            c, s = best(i, j - 1)
            options.append((c + 1, s + indel))
        return min(options, key=lambda o: (o[0], -o[1]))

    return best(len(literal), len(word))


def auto_correct(touches, model, counts: dict[str, int], max_ed: int, margin: float, indel: float, unseen: float):
    literal = "".join(min(model.layout.chars, key=lambda c: (-gaussian_ll(model, t, c), c)) for t in touches)
    total = sum(counts.values())
    if total == 0:
        return literal
    base = math.log(counts.get(literal, unseen) / total) + channel(literal, literal, touches, model, indel)[1]
    best_word, best_score = literal, base
    for w in sorted(counts):
        if w == literal or edit_distance(w, literal) > max_ed:
            continue
        s = math.log(counts[w] / total) + channel(w, literal, touches, model, indel)[1]
        if s > best_score:
            best_word, best_score = w, s
    return best_word if best_word != literal and best_score > base + margin else literal


def word_accuracy(reference: str, hypothesis: str) -> float:
    """Fraction of reference words reproduced in order (LCS over word tokens)."""
    ref, hyp = reference.split(), hypothesis.split()
    if not ref:
        return 1.0
    dp = np.zeros((len(ref) + 1, len(hyp) + 1), dtype=int)
    for i, a in enumerate(ref, 1):
        for j, b in enumerate(hyp, 1):
            dp[i, j] = dp[i - 1, j - 1] + 1 if a == b else max(dp[i - 1, j], dp[i, j - 1])
    return dp[-1, -1] / len(ref)


def make_eval_corpus(lines: list[str], rng: np.random.Generator, n: int):
    """Random (source, answer, references) triples mixing good, broken and unrelated answers."""
    from proofread_forge.corruption import CorruptionConfig, corrupt, make_rng

    cfg = CorruptionConfig(p_positional=0.15, p_omit=0.05)
    out = []
    for _ in range(n):
        ref = lines[int(rng.integers(len(lines)))]
        source, _ = corrupt(ref, cfg, make_rng(int(rng.integers(2**31))))
        kind = int(rng.integers(6))
        if kind == 0:
            answer = ref
        elif kind == 1:
            answer = source
        elif kind == 2:
            answer = ref.lower().rstrip(".!?")
        elif kind == 3:
            answer = "I do not think " + ref[:1].lower() + ref[1:]
        elif kind == 4:
            answer = lines[int(rng.integers(len(lines)))]
        else:
            answer = ref + " " + ref.split()[-1]
        refs = [ref]
        if rng.random() < 0.3:
            refs.append(lines[int(rng.integers(len(lines)))])
        out.append((source, answer, refs))
    return out
