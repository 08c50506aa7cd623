from __future__ import annotations

from importlib import resources

import pytest
from hypothesis import HealthCheck, settings

from proofread_forge.decoder import Vocabulary
from proofread_forge.judges import RuleJudge

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def vocab() -> Vocabulary:
    return Vocabulary.default()


@pytest.fixture(scope="session")
def judge(vocab) -> RuleJudge:
    return RuleJudge(vocab)


@pytest.fixture(scope="session")
def corpus() -> list[str]:
    text = (resources.files("proofread_forge") / "data" / "corpus.txt").read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line.strip()]


@pytest.fixture(scope="session")
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion; returns ``ok`` for asserting."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bench_examples():
    from proofread_forge.pipeline import read_jsonl
    from proofread_forge.serving import bench_corpus_path

    return read_jsonl(str(bench_corpus_path()))


@pytest.fixture(scope="session")
def corrupted_inputs(corpus) -> list[str]:
    """1000 lightly corrupted corpus lines (default corruption config)."""
    from proofread_forge.corruption import CorruptionConfig, corrupt, make_rng

    cfg = CorruptionConfig()
    out = []
    i = 0
    while len(out) < 1000:
        line = corpus[i % len(corpus)]
        out.append(corrupt(line, cfg, make_rng(100 + i // len(corpus), i))[0])
        i += 1
    return out


@pytest.fixture(scope="session")
def serving_model(vocab, bench_examples, corrupted_inputs):
    from proofread_forge.keyboard import SpatialModel
    from proofread_forge.serving import EditChannelModel

    texts = [ex.source for ex in bench_examples] + corrupted_inputs
    return EditChannelModel.build(texts, vocab, SpatialModel())
