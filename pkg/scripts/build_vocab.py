"""Regenerate src/proofread_forge/data/vocab_en.tsv from wordfreq.

Needs ``wordfreq`` (not a runtime dependency). Counts are frequencies
scaled to one billion tokens; every word in the bundled corpus is included.
"""

import re
from pathlib import Path

from wordfreq import top_n_list, word_frequency

DATA = Path(__file__).resolve().parents[1] / "src" / "proofread_forge" / "data"
WORD = re.compile(r"^[a-z](?:[a-z']*[a-z])?$")
SIZE = 10_000
SCALE = 1e9


def main():
    words = [w for w in top_n_list("en", 20_000) if WORD.match(w)][:SIZE]
    corpus = (DATA / "corpus.txt").read_text(encoding="utf-8").lower()
    extra = sorted({w for w in re.findall(r"[a-z](?:[a-z']*[a-z])?", corpus) if WORD.match(w)} - set(words))
    rows = []
    for w in words + extra:
        rows.append((w, max(1, round(word_frequency(w, "en") * SCALE))))
    with open(DATA / "vocab_en.tsv", "w", encoding="utf-8") as fh:
        for w, c in rows:
            fh.write(f"{w}\t{c}\n")
    print(f"{len(rows)} words ({len(extra)} added from corpus: {extra[:20]})")


if __name__ == "__main__":
    main()
