"""Regenerate data/bench.jsonl: every corpus line lightly corrupted with the default config."""

from __future__ import annotations

import sys
from pathlib import Path

from proofread_forge.corruption import CorruptionConfig, corrupt, make_rng
from proofread_forge.pipeline import ProofreadExample

DATA = Path(__file__).resolve().parents[1] / "src" / "proofread_forge" / "data"


def main(seed: int = 7) -> int:
    cfg = CorruptionConfig(seed=seed)
    lines = [l.rstrip("\n") for l in (DATA / "corpus.txt").read_text(encoding="utf-8").splitlines() if l.strip()]
    with open(DATA / "bench.jsonl", "w", encoding="utf-8") as fh:
        for i, line in enumerate(lines):
            noisy, edits = corrupt(line, cfg, make_rng(seed, i))
            meta = {"seed": seed, "line": i, "edits": [e.to_dict() for e in edits]}
            fh.write(ProofreadExample(noisy, [line], meta).to_json() + "\n")
    print(f"wrote {len(lines)} examples", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
