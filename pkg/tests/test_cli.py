from __future__ import annotations

import json
import subprocess
import sys

import pytest

from proofread_forge.cli import GlobalConfig, run
from proofread_forge.pipeline import ProofreadExample, write_jsonl


@pytest.fixture
def dataset(tmp_path):
    path = tmp_path / "data.jsonl"
    rows = [
        ProofreadExample("Cn yu snd me the reprt?", ["Can you send me the report?"]),
        ProofreadExample("Thx for th help.", ["Thanks for the help."]),
    ]
    with open(path, "w", encoding="utf-8") as fh:
        write_jsonl(rows, fh)
    answers = tmp_path / "answers.txt"
    answers.write_text("Can you send me the report?\nThx for th help.\n", encoding="utf-8")
    return path, answers


def test_evaluate_writes_report(tmp_path, dataset):
    data, answers = dataset
    report = tmp_path / "report.json"
    assert run(["evaluate", "--dataset", str(data), "--answers", str(answers), "--report", str(report)]) == 0
    d = json.loads(report.read_text())
    assert d["n"] == 2
    assert d["counts"]["good"] == 1 and d["counts"]["bad"] == 1


def test_usage_errors_exit_1(capsys):
    assert run([]) == 1
    assert run(["evaluate", "--answers", "x"]) == 1
    assert run(["no-such-command"]) == 1
    assert "required" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path, dataset):
    _, answers = dataset
    assert run(["evaluate", "--dataset", str(tmp_path / "nope.jsonl"), "--answers", str(answers)]) == 2


def test_unreachable_judge_exits_2(tmp_path, dataset):
    data, answers = dataset
    args = ["evaluate", "--dataset", str(data), "--answers", str(answers), "--judge", "http://127.0.0.1:9/judge"]
    assert run(args) == 2


def test_bad_config_exits_1(tmp_path, dataset):
    data, answers = dataset
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"no_such_key": 1}))
    assert run(["evaluate", "--config", str(cfg), "--dataset", str(data), "--answers", str(answers)]) == 1


def test_misaligned_answers_exit_1(tmp_path, dataset):
    data, _ = dataset
    short = tmp_path / "short.txt"
    short.write_text("only one\n")
    assert run(["evaluate", "--dataset", str(data), "--answers", str(short)]) == 1


def test_config_seed_propagates():
    cfg = GlobalConfig.from_dict({"seed": 3, "corruption": {"p_positional": 0.1}}).with_seed(9)
    assert cfg.seed == 9 and cfg.corruption.seed == 9 and cfg.serving.seed == 9
    assert cfg.corruption.p_positional == 0.1


def test_pipeline_is_deterministic(tmp_path, corpus):
    src = tmp_path / "clean.txt"
    src.write_text("\n".join(corpus[:40]) + "\n", encoding="utf-8")
    outs = []
    for jobs in ("1", "2"):
        out = tmp_path / f"out{jobs}.jsonl"
        stats = tmp_path / f"stats{jobs}.json"
        args = ["pipeline", "--input", str(src), "--output", str(out), "--seed", "4", "--jobs", jobs, "--stats", str(stats)]
        assert run(args) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    s = json.loads(stats.read_text())
    assert isinstance(s, dict)


def test_decode_sim_stdio(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("helo wrld\n", encoding="utf-8")
    out = tmp_path / "out.jsonl"
    assert run(["decode-sim", "--input", str(src), "--output", str(out)]) == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(rows) == 1


def test_score_rewards(tmp_path, dataset, capsys):
    data, answers = dataset
    assert run(["score-rewards", "--dataset", str(data), "--candidates", str(answers)]) == 0
    rows = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert rows == [{"index": 0, "reward": 1.0}, {"index": 1, "reward": 0.0}]


def test_serve_sim_small(tmp_path, dataset):
    data, _ = dataset
    report = tmp_path / "serve.json"
    args = ["serve-sim", "--dataset", str(data), "--greedy", "--max-draft-len", "4", "--report", str(report)]
    assert run(args) == 0
    d = json.loads(report.read_text())
    assert d["n"] == 2 and d["mode"] == "speculative"
    assert d["median_target_calls"] <= d["baseline"]["median_target_calls"]
    assert run(args[:-2] + ["--buckets", "32,16"]) == 1


def test_calibrate_sigma(capsys):
    assert run(["calibrate-sigma", "--chars", "20000"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert abs(d["literal_error_rate"] - 0.085) <= 0.005
    assert d["sigma"] > 0


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "proofread_forge.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "serve-sim" in proc.stdout
