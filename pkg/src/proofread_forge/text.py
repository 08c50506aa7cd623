"""Small text utilities shared by the pipeline rules and the rule judge."""

from __future__ import annotations

import re
import unicodedata

URL_RE = re.compile(r"^(?:https?://|www\.)\S+$", re.IGNORECASE)
# emoticons such as :) :-( ;D :P <3 XD, allowing trailing sentence punctuation
EMOTICON_RE = re.compile(r"^(?:[:;=8][-o^']?[()\[\]DPpOo3/\\|*]+|<3+|[xX][dD]+|\^_?\^|:'\()[.,!?]*$")
DATETIME_RE = re.compile(r"^\(?(?:\d{1,2}/\d{1,2}/\d{2,4}|\d{1,2}:\d{2}(?::\d{2})?)[.,!?)]*$")
WORD_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)*")


def is_emoji(token: str) -> bool:
    # Symbol-other codepoints outside ASCII cover pictographic emoji.
    return any(ord(c) > 0x2000 and unicodedata.category(c) == "So" for c in token)


def is_protected(token: str) -> bool:
    """URL, emoticon/emoji, or date/time token that rules must keep verbatim."""
    return bool(URL_RE.match(token) or EMOTICON_RE.match(token) or DATETIME_RE.match(token) or is_emoji(token))


def words(text: str) -> list[str]:
    """Lowercased word tokens, skipping protected tokens."""
    out = []
    for tok in text.split():
        if is_protected(tok):
            continue
        out.extend(w.lower() for w in WORD_RE.findall(tok))
    return out


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(cur[j - 1] + 1, prev[j] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def fuzzy_equal(a: str, b: str) -> bool:
    """Same word up to a typo: one edit for short words, two from length 5."""
    if a == b:
        return True
    limit = 1 if max(len(a), len(b)) <= 4 else 2
    if abs(len(a) - len(b)) > limit or min(len(a), len(b)) < 2:
        return False
    return edit_distance(a, b) <= limit
