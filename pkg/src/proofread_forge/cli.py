"""proofread-forge command line.

Exit codes: 0 success, 1 bad arguments or invalid input, 2 I/O failure.
Logs go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .corruption import CorruptionConfig, make_rng
from .decoder import SimulatorConfig, Vocabulary, simulate
from .judges import JudgeError, make_judge
from .keyboard import SpatialModel, calibrate_sigma, literal_error_rate
from .metrics import evaluate_corpus
from .pipeline import PipelineConfig, build_dataset, read_jsonl, write_jsonl
from .rewards import RewardConfig, SequenceLogProbs, score
from .serving import EditChannelModel, ServingConfig, bench, bench_corpus_path, quantize_tables

log = logging.getLogger("proofread_forge")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass(frozen=True)
class GlobalConfig:
    corruption: CorruptionConfig = field(default_factory=CorruptionConfig)
    simulator: SimulatorConfig = field(default_factory=SimulatorConfig)
    serving: ServingConfig = field(default_factory=ServingConfig)
    vocab_path: str | None = None
    judge: str = "rule"
    seed: int = 0
    jobs: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "GlobalConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(
            corruption=CorruptionConfig.from_dict(d.get("corruption", {})),
            simulator=SimulatorConfig(**d.get("simulator", {})),
            serving=ServingConfig(**_serving_kwargs(d.get("serving", {}))),
            vocab_path=d.get("vocab_path"),
            judge=d.get("judge", "rule"),
            seed=int(d.get("seed", 0)),
            jobs=int(d.get("jobs", 1)),
        )
        if cfg.vocab_path is not None and not Path(cfg.vocab_path).is_file():
            raise FileNotFoundError(f"vocab_path {cfg.vocab_path!r} does not exist")
        return cfg.with_seed(cfg.seed)

    def with_seed(self, seed: int) -> "GlobalConfig":
        return replace(
            self,
            seed=seed,
            corruption=replace(self.corruption, seed=seed),
            simulator=replace(self.simulator, seed=seed),
            serving=replace(self.serving, seed=seed),
        )


def _serving_kwargs(d: dict) -> dict:
    d = dict(d)
    if "bucket_keys" in d:
        d["bucket_keys"] = tuple(d["bucket_keys"])
    return d


def load_config(args) -> GlobalConfig:
    cfg = GlobalConfig()
    if args.config:
        cfg = GlobalConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.jobs is not None:
        cfg = replace(cfg, jobs=args.jobs)
    if getattr(args, "corruption_config", None):
        cc = CorruptionConfig.from_json(args.corruption_config)
        cfg = replace(cfg, corruption=replace(cc, seed=cfg.seed))
    if getattr(args, "vocab", None):
        cfg = replace(cfg, vocab_path=args.vocab)
    if getattr(args, "judge", None):
        cfg = replace(cfg, judge=args.judge)
    return cfg


def _vocab(cfg: GlobalConfig) -> Vocabulary:
    return Vocabulary.from_tsv(cfg.vocab_path) if cfg.vocab_path else Vocabulary.default()


def _open_out(path: str | None):
    return open(path, "w", encoding="utf-8") if path and path != "-" else _Stdout()


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _read_lines(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def cmd_pipeline(args, cfg: GlobalConfig) -> int:
    vocab = _vocab(cfg)
    judge = make_judge(cfg.judge, vocab)
    pcfg = PipelineConfig(corruption=cfg.corruption, simulator=cfg.simulator)
    stats: dict = {}
    lines = _read_lines(args.input)
    with _open_out(args.output) as fh:
        n = write_jsonl(build_dataset(lines, pcfg, vocab, judge, jobs=cfg.jobs, stats=stats), fh)
    log.info("wrote %d examples", n)
    if args.stats:
        Path(args.stats).write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def cmd_decode_sim(args, cfg: GlobalConfig) -> int:
    vocab = _vocab(cfg)
    spatial = cfg.corruption.spatial if args.sigma is None else SpatialModel.isotropic(args.sigma)
    sim = replace(cfg.simulator, touch_noise=args.touch_noise or cfg.simulator.touch_noise)
    src = open(args.input, encoding="utf-8") if args.input else sys.stdin
    try:
        with _open_out(args.output) as out:
            for i, line in enumerate(src):
                line = line.rstrip("\r\n")
                res = simulate(line, spatial, vocab, sim, make_rng(cfg.seed, i))
                out.write(json.dumps(res.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
    finally:
        if src is not sys.stdin:
            src.close()
    return 0


def cmd_evaluate(args, cfg: GlobalConfig) -> int:
    dataset = read_jsonl(args.dataset)
    answers = _read_lines(args.answers)
    judge = make_judge(cfg.judge, _vocab(cfg) if cfg.judge == "rule" else None)
    report = evaluate_corpus(dataset, answers, judge, keep_examples=args.per_example)
    with _open_out(args.report) as fh:
        fh.write(json.dumps(report.to_dict(with_examples=args.per_example), indent=2, sort_keys=True) + "\n")
    log.info("good %.4f bad %.4f over %d examples", report.good, report.bad, report.n)
    return 0


def cmd_score_rewards(args, cfg: GlobalConfig) -> int:
    dataset = read_jsonl(args.dataset)
    candidates = _read_lines(args.candidates)
    if len(candidates) != len(dataset):
        raise ValueError(f"dataset has {len(dataset)} examples but {len(candidates)} candidates")
    logprobs = [None] * len(dataset)
    if args.logprobs:
        rows = [json.loads(l) for l in _read_lines(args.logprobs) if l.strip()]
        if len(rows) != len(dataset):
            raise ValueError(f"dataset has {len(dataset)} examples but {len(rows)} log-prob rows")
        logprobs = [SequenceLogProbs(r["policy"], r["reference"]) for r in rows]
    rcfg = RewardConfig(kind=args.reward, kl_beta=args.kl_beta, combiner=args.combiner)
    judge = make_judge(cfg.judge, _vocab(cfg) if cfg.judge == "rule" else None)
    with _open_out(args.output) as fh:
        for i, (ex, cand, lp) in enumerate(zip(dataset, candidates, logprobs)):
            r = score(ex.source, cand, ex.references, judge, rcfg, lp)
            fh.write(json.dumps({"index": i, "reward": r}) + "\n")
    return 0


def cmd_serve_sim(args, cfg: GlobalConfig) -> int:
    scfg = cfg.serving
    overrides = {}
    if args.temperature is not None:
        overrides["temperature"] = args.temperature
    if args.buckets:
        overrides["bucket_keys"] = tuple(int(b) for b in args.buckets.split(","))
    if args.max_draft_len is not None:
        overrides["max_draft_len"] = args.max_draft_len
    if args.greedy:
        overrides["greedy"] = True
    scfg = replace(scfg, **overrides)
    path = args.dataset or str(bench_corpus_path())
    sources = [ex.source for ex in read_jsonl(path)]
    if not sources:
        raise ValueError(f"{path}: no examples")
    model = EditChannelModel.build(sources, _vocab(cfg), cfg.corruption.spatial, cfg.simulator)
    tokenizer = model.tokenizer
    if args.quantize:
        model = quantize_tables(model)
    report = bench(model, tokenizer, sources, scfg, mode=args.mode, keep_traces=args.traces)
    with _open_out(args.report) as fh:
        fh.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    log.info("median call reduction %.1f%% over %d examples", report.call_reduction_pct, report.n)
    return 0


def cmd_calibrate_sigma(args, cfg: GlobalConfig) -> int:
    if args.text:
        text = Path(args.text).read_text(encoding="utf-8")
    else:
        text = (resources.files("proofread_forge") / "data" / "corpus.txt").read_text(encoding="utf-8")
    if not text.strip():
        raise ValueError("calibration text is empty")
    text = (text * (args.chars // max(len(text), 1) + 1))[: args.chars]
    sigma = calibrate_sigma(text, args.target_error, seed=cfg.seed)
    # check on fresh noise
    rate = literal_error_rate(SpatialModel.isotropic(sigma), text, make_rng(cfg.seed, 1))
    print(json.dumps({"sigma": round(sigma, 6), "target_error": args.target_error, "literal_error_rate": rate}))
    return 0


COMMANDS = {
    "pipeline": cmd_pipeline,
    "decode-sim": cmd_decode_sim,
    "evaluate": cmd_evaluate,
    "score-rewards": cmd_score_rewards,
    "serve-sim": cmd_serve_sim,
    "calibrate-sigma": cmd_calibrate_sigma,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="GlobalConfig JSON; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="proofread-forge", description="Synthetic proofreading data, decoding, metrics and serving.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("pipeline", parents=[common], help="corrupt, decode and filter a clean corpus")
    s.add_argument("--input", required=True, help="clean corpus, one line per example")
    s.add_argument("--output", required=True, help="dataset JSONL")
    s.add_argument("--corruption-config")
    s.add_argument("--vocab")
    s.add_argument("--judge")
    s.add_argument("--stats", help="write drop counts as JSON")

    s = sub.add_parser("decode-sim", parents=[common], help="keyboard-decode text lines")
    s.add_argument("--vocab")
    s.add_argument("--sigma", type=float)
    s.add_argument("--touch-noise", action="store_true", help="re-sample touches instead of key centres")
    s.add_argument("--input", help="default: stdin")
    s.add_argument("--output", help="default: stdout")

    s = sub.add_parser("evaluate", parents=[common], help="EM/NEM/Good/Bad metrics for answers")
    s.add_argument("--dataset", required=True)
    s.add_argument("--answers", required=True, help="one answer per line, aligned with the dataset")
    s.add_argument("--judge")
    s.add_argument("--vocab")
    s.add_argument("--report", help="default: stdout")
    s.add_argument("--per-example", action="store_true")

    s = sub.add_parser("score-rewards", parents=[common], help="per-example rewards as JSONL")
    s.add_argument("--dataset", required=True)
    s.add_argument("--candidates", required=True)
    s.add_argument("--reward", choices=("global", "direct"), default="direct")
    s.add_argument("--combiner", choices=("product", "weighted_sum"), default="product")
    s.add_argument("--kl-beta", type=float, default=0.0)
    s.add_argument("--logprobs", help='JSONL rows {"policy": [...], "reference": [...]}')
    s.add_argument("--judge")
    s.add_argument("--vocab")
    s.add_argument("--output", help="default: stdout")

    s = sub.add_parser("serve-sim", parents=[common], help="baseline vs speculative decoding benchmark")
    s.add_argument("--dataset", help="dataset JSONL; default: the shipped benchmark set")
    s.add_argument("--mode", choices=("baseline", "speculative"), default="speculative")
    s.add_argument("--temperature", type=float)
    s.add_argument("--buckets", help="comma separated, e.g. 16,32,64,128")
    s.add_argument("--max-draft-len", type=int)
    s.add_argument("--greedy", action="store_true")
    s.add_argument("--quantize", action="store_true", help="serve int8 tables")
    s.add_argument("--traces", action="store_true", help="include per-request traces")
    s.add_argument("--vocab")
    s.add_argument("--report", help="default: stdout")

    s = sub.add_parser("calibrate-sigma", parents=[common], help="fit sigma to a literal letter error rate")
    s.add_argument("--target-error", type=float, default=0.085)
    s.add_argument("--text", help="sample text file; default: the bundled corpus")
    s.add_argument("--chars", type=int, default=100_000)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("proofread-forge: error: a subcommand is required", file=sys.stderr)
            return 1
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except (OSError, JudgeError) as exc:
        print(f"proofread-forge {args.command}: I/O error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError) as exc:
        print(f"proofread-forge {args.command}: invalid input: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
