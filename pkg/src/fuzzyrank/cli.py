"""Command-line interface: train, index, query, compare, bench.

Exit codes: 0 success, 2 input error, 3 empty or failed query.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import random
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from ._accel import backend_name
from .bench import run_bench, write_bench_csv
from .corpus import CorpusError, read_corpus
from .fuzzy import load_rules
from .opinion import LexiconError, default_lexicon_path, load_dependencies, load_lexicon
from .pipeline import Pipeline, load_sentence_records, save_sentence_records
from .rank import (
    AGGREGATIONS,
    Bm25Index,
    EmptyCorpus,
    NoAspectFound,
    bm25_build,
    bm25_rank,
    bm25_terms,
    compare_rankings,
    load_score_table,
    parse_query,
    rank_entities,
    save_score_table,
)
from .synth import training_sequences
from .tagger.conll import read_conll
from .tagger.crf import CrfError, CrfModel, TrainConfig, aspect_spans, crf_log_likelihood, crf_train, crf_viterbi
from .tagger.pos import read_pos_lexicon

log = logging.getLogger("fuzzyrank")

EXIT_OK, EXIT_INPUT, EXIT_QUERY = 0, 2, 3
INDEX_FORMAT = "fuzzyrank-index"


class InputError(Exception):
    pass


class QueryFailed(Exception):
    pass


@dataclass
class RunConfig:
    corpus: str | None = None
    corpus_format: str | None = None
    lexicon: str | None = None
    model: str | None = None
    rules: str | None = None
    deps: str | None = None
    pos_lexicon: str | None = None
    train_data: str | None = None
    output: str | None = None
    window: int = 5
    negation: bool = True
    aggregation: str = "mean"
    k1: float = 1.2
    b: float = 0.75
    resolution: int = 1000
    epochs: int = 20
    learning_rate: float = 0.1
    l2: float = 1e-3
    holdout: float = 0.1
    seed: int | None = None
    threads: int = 1

    def validate(self) -> None:
        if self.window < 0:
            raise InputError("window must be >= 0")
        if self.aggregation not in AGGREGATIONS:
            raise InputError(f"aggregation must be one of {AGGREGATIONS}")
        if self.k1 < 0 or not 0 <= self.b <= 1:
            raise InputError("need k1 >= 0 and 0 <= b <= 1")
        if self.resolution < 1:
            raise InputError("resolution must be >= 1")
        if self.epochs < 0 or self.learning_rate < 0 or self.l2 < 0:
            raise InputError("epochs, learning rate and l2 must be >= 0")
        if not 0 <= self.holdout < 1:
            raise InputError("holdout must be in [0, 1)")
        if self.threads < 1:
            raise InputError("threads must be >= 1")

    @classmethod
    def from_file(cls, path) -> RunConfig:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def _require(path, what):
    if not path:
        raise InputError(f"missing {what} path")
    if not Path(path).exists():
        raise InputError(f"{what} not found: {path}")
    return path


def _load_pipeline(cfg: RunConfig) -> Pipeline:
    model = CrfModel.load(_require(cfg.model, "model"))
    lexicon = load_lexicon(_require(cfg.lexicon, "lexicon") if cfg.lexicon else default_lexicon_path())
    fuzzy = load_rules(_require(cfg.rules, "rules") if cfg.rules else None)
    if cfg.resolution != fuzzy.resolution:
        fuzzy = dataclasses.replace(fuzzy, resolution=cfg.resolution)
    deps = load_dependencies(_require(cfg.deps, "dependency file")) if cfg.deps else None
    return Pipeline(model, lexicon, fuzzy, cfg.window, cfg.negation, deps)


# -- train ----------------------------------------------------------------------


def _evaluate(model, data):
    tokens = correct = tp = fp = fn = 0
    for ex in data:
        pred = crf_viterbi(model, ex.tokens).labels
        for g, p in zip(ex.labels, pred):
            tokens += 1
            correct += g == p
            g_asp, p_asp = g != "O", p != "O"
            tp += g_asp and p_asp
            fp += p_asp and not g_asp
            fn += g_asp and not p_asp
    gold = {(i, s) for i, ex in enumerate(data) for s in aspect_spans(ex.labels)}
    pred = {(i, s) for i, ex in enumerate(data) for s in aspect_spans(crf_viterbi(model, ex.tokens).labels)}
    f1 = lambda t, a, b: 2 * t / (2 * t + a + b) if t + a + b else 1.0  # noqa: E731
    return {
        "sentences": len(data),
        "tokens": tokens,
        "token_accuracy": correct / tokens if tokens else None,
        "aspect_token_f1": f1(tp, fp, fn),
        "aspect_span_f1": f1(len(gold & pred), len(pred - gold), len(gold - pred)),
    }


def cmd_train(cfg: RunConfig, report_path=None) -> dict:
    if cfg.seed is None:
        raise InputError("train requires --seed")
    try:
        data = read_conll(_require(cfg.train_data, "training data"))
    except CrfError as exc:
        raise InputError(f"malformed training data: {exc}") from None
    if not data:
        raise InputError("training data is empty")
    order = list(range(len(data)))
    random.Random(cfg.seed).shuffle(order)
    n_hold = int(round(len(data) * cfg.holdout)) if len(data) > 1 else 0
    held = [data[i] for i in sorted(order[:n_hold])]
    train = [data[i] for i in sorted(order[n_hold:])]

    tcfg = TrainConfig(cfg.epochs, cfg.learning_rate, cfg.l2, cfg.seed)
    history = []

    def on_epoch(epoch, model):
        history.append({"epoch": epoch, "log_likelihood": crf_log_likelihood(model, train)})
        log.info("epoch %d: mean log-likelihood %.6f", epoch, history[-1]["log_likelihood"])

    pos_lex = read_pos_lexicon(_require(cfg.pos_lexicon, "POS lexicon") if cfg.pos_lexicon else None)
    model = crf_train(train, tcfg, pos_lexicon=pos_lex, callback=on_epoch)
    model.save(_require_parent(cfg.model, "model"))
    report = {
        "config": dataclasses.asdict(tcfg),
        "train_sentences": len(train),
        "epochs": history,
        "train": _evaluate(model, train),
        "heldout": _evaluate(model, held) if held else None,
        "attributes": len(model.attributes),
        "aspect_vocabulary": list(model.aspect_vocabulary),
    }
    report_path = report_path or str(cfg.model) + ".report.json"
    Path(report_path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    held_f1 = report["heldout"]["aspect_token_f1"] if held else float("nan")
    print(f"trained on {len(train)} sentences, {len(model.attributes)} attributes; "
          f"held-out aspect-token F1 {held_f1:.4f}")
    return report


def _require_parent(path, what):
    if not path:
        raise InputError(f"missing {what} path")
    parent = Path(path).parent
    if not parent.exists():
        raise InputError(f"directory does not exist: {parent}")
    return path


# -- index ------------------------------------------------------------------------


def cmd_index(cfg: RunConfig):
    if not cfg.output:
        raise InputError("missing output directory (--out)")
    out = Path(cfg.output)
    try:
        corpus = read_corpus(_require(cfg.corpus, "corpus"), cfg.corpus_format)
    except CorpusError as exc:
        raise InputError(str(exc)) from None
    if not len(corpus):
        raise InputError("corpus is empty")
    pipeline = _load_pipeline(cfg)
    result = pipeline.index_corpus(corpus, threads=cfg.threads, aggregation=cfg.aggregation)
    t0 = time.perf_counter()
    index = bm25_build(sorted(corpus.entity_texts().items()), cfg.k1, cfg.b)
    result.timings["bm25"] = time.perf_counter() - t0
    for stage, secs in result.timings.items():
        log.info("stage %-9s %.3fs", stage, secs)
    if not result.scores:
        log.warning("no scored aspect mentions; score table is empty")
    for reason, n in sorted(result.failures.items()):
        log.warning("%d aspect mentions skipped: %s", n, reason)

    out.mkdir(parents=True, exist_ok=True)
    save_score_table(result.scores, out / "scores.tsv")
    save_sentence_records(result.records, out / "sentences.tsv")
    index.save(out / "bm25.json")
    manifest = {
        "format": INDEX_FORMAT,
        "version": 1,
        "model": str(Path(cfg.model).resolve()),
        "lexicon": str(Path(cfg.lexicon).resolve()) if cfg.lexicon else None,
        "rules": str(Path(cfg.rules).resolve()) if cfg.rules else None,
        "window": cfg.window,
        "negation": cfg.negation,
        "aggregation": cfg.aggregation,
        "k1": cfg.k1,
        "b": cfg.b,
        "resolution": cfg.resolution,
        "counts": {
            "reviews": len(corpus),
            "entities": len(corpus.entities),
            "sentences": result.sentences,
            "aspect_mentions": result.mentions,
            "scored_mentions": len(result.records),
            "score_rows": len(result.scores),
            "skipped": dict(sorted(result.failures.items())),
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"indexed {len(corpus)} reviews ({result.sentences} sentences, {len(result.records)} scored mentions) "
          f"into {out}")
    return result


# -- query / compare ------------------------------------------------------------------


def _index_config(cfg: RunConfig, index_dir: Path, explicit: set) -> RunConfig:
    try:
        manifest = json.loads((index_dir / "manifest.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        raise InputError(f"not an index directory: {index_dir}") from None
    if manifest.get("format") != INDEX_FORMAT:
        raise InputError(f"not an index directory: {index_dir}")
    merged = dataclasses.replace(cfg)
    for key in ("model", "lexicon", "rules", "window", "negation", "aggregation", "k1", "b", "resolution"):
        if key not in explicit:
            setattr(merged, key, manifest.get(key))
    return merged


def _proposed(cfg, index_dir, query):
    pipeline = _load_pipeline(cfg)
    try:
        parsed = parse_query(query, pipeline)
    except NoAspectFound as exc:
        raise QueryFailed(str(exc)) from None
    scores = load_score_table(index_dir / "scores.tsv")
    return parsed, rank_entities(parsed, scores)


def cmd_query(cfg: RunConfig, index_dir, query, explain=False, explicit=frozenset()):
    index_dir = Path(index_dir)
    cfg = _index_config(cfg, index_dir, set(explicit))
    parsed, ranked = _proposed(cfg, index_dir, query)
    if not len(ranked):
        raise QueryFailed(f"no entity has opinions on {', '.join(parsed.terms)}")
    print(ranked.format_table())
    if explain:
        print()
        for qa in parsed.aspects:
            print(f"query aspect {qa.term!r}: orientation {qa.orientation:+d}, strength {qa.strength:.4f} ({qa.label})")
        records = load_sentence_records(index_dir / "sentences.tsv")
        terms = set(parsed.terms)
        for entry in ranked:
            print(f"\n[{entry.rank}] {entry.entity_id}")
            for r in records:
                if r.entity_id == entry.entity_id and r.aspect in terms:
                    print(f"  {r.review_id}#{r.sentence} {r.aspect}: {r.signed_score:+.4f} {r.label}  | {r.text}")
    return ranked


def cmd_compare(cfg: RunConfig, index_dir, query, out=None, explicit=frozenset()):
    index_dir = Path(index_dir)
    cfg = _index_config(cfg, index_dir, set(explicit))
    parsed, proposed = _proposed(cfg, index_dir, query)
    if not len(proposed):
        raise QueryFailed(f"no entity has opinions on {', '.join(parsed.terms)}")
    bm25 = Bm25Index.load(index_dir / "bm25.json")
    baseline = bm25_rank(bm25, bm25_terms(query), proposed.entity_ids)
    comparison = compare_rankings(proposed, baseline)
    report = comparison.format_tsv()
    sys.stdout.write(report)
    if out:
        Path(out).write_text(report, encoding="utf-8")
    return comparison


# -- bench ------------------------------------------------------------------------------


def cmd_bench(cfg: RunConfig, sizes, out=None, repeats=3, max_size=200_000, entities=20):
    seed = 0 if cfg.seed is None else cfg.seed
    if cfg.model:
        model = CrfModel.load(_require(cfg.model, "model"))
    else:
        model = crf_train(training_sequences(200, seed=seed), TrainConfig(epochs=5, seed=seed))
    lexicon = load_lexicon(cfg.lexicon or default_lexicon_path())
    pipeline = Pipeline(model, lexicon, load_rules(cfg.rules), cfg.window, cfg.negation)
    result = run_bench(pipeline, sizes, seed=seed, threads=cfg.threads, repeats=repeats,
                       max_size=max_size, n_entities=entities)
    if out:
        write_bench_csv(result, out)
    print(f"backend {backend_name()}")
    print("size,wall_time_s,workers")
    for r in result.rows:
        print(f"{r.size},{r.wall_time_s:.4f},{r.workers}")
    r2 = "n/a" if result.r2 is None else f"{result.r2:.4f}"
    print(f"linear fit: {result.slope * 1000:.4f} ms/review, intercept {result.intercept:.4f}s, R^2 {r2}")
    return result


# -- argument parsing -------------------------------------------------------------------


def _sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("sizes must be comma-separated integers") from None
    if any(s < 0 for s in sizes):
        raise argparse.ArgumentTypeError("sizes must be >= 0")
    return sizes


# maps CLI dest -> RunConfig field
_OPTION_FIELDS = {
    "corpus": "corpus", "format": "corpus_format", "lexicon": "lexicon", "model": "model", "rules": "rules",
    "deps": "deps", "pos_lexicon": "pos_lexicon", "data": "train_data", "out_dir": "output",
    "window": "window", "negation": "negation", "aggregation": "aggregation", "k1": "k1", "b": "b",
    "resolution": "resolution", "epochs": "epochs", "lr": "learning_rate", "l2": "l2", "holdout": "holdout",
    "seed": "seed", "threads": "threads",
}


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=S, help="JSON file with RunConfig fields")
    common.add_argument("--threads", type=int, default=S)
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("-v", "--verbose", action="store_true", default=S)
    common.add_argument("-q", "--quiet", action="store_true", default=S)

    pipe = argparse.ArgumentParser(add_help=False)
    pipe.add_argument("--model", default=S, help="CRF model file")
    pipe.add_argument("--lexicon", default=S, help="polarity lexicon TSV (default: bundled fixture)")
    pipe.add_argument("--rules", default=S, help="fuzzy rule file (default: bundled rules)")
    pipe.add_argument("--window", type=int, default=S)
    pipe.add_argument("--no-negation", dest="negation", action="store_false", default=S)
    pipe.add_argument("--resolution", type=int, default=S)

    p = argparse.ArgumentParser(prog="fuzzyrank", parents=[common], description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fuzzyrank {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", parents=[common], help="train the aspect CRF from CoNLL data")
    t.add_argument("--data", default=S, help="CoNLL training file (surface<TAB>label)")
    t.add_argument("--model", default=S, help="output model path")
    t.add_argument("--report", default=None, help="training report path (default: MODEL.report.json)")
    t.add_argument("--pos-lexicon", default=S)
    t.add_argument("--epochs", type=int, default=S)
    t.add_argument("--lr", type=float, default=S)
    t.add_argument("--l2", type=float, default=S)
    t.add_argument("--holdout", type=float, default=S)

    i = sub.add_parser("index", parents=[common, pipe], help="score a review corpus and build BM25")
    i.add_argument("--corpus", default=S, help="JSONL/CSV reviews or a persisted corpus")
    i.add_argument("--format", choices=("jsonl", "csv"), default=S)
    i.add_argument("--deps", default=S, help="CoNLL-U-like dependency file")
    i.add_argument("--out", dest="out_dir", default=S, help="index output directory")
    i.add_argument("--aggregation", choices=AGGREGATIONS, default=S)
    i.add_argument("--k1", type=float, default=S)
    i.add_argument("--b", type=float, default=S)

    q = sub.add_parser("query", parents=[common, pipe], help="rank entities for a query")
    q.add_argument("--index", required=True, help="index directory")
    q.add_argument("--explain", action="store_true")
    q.add_argument("query")

    c = sub.add_parser("compare", parents=[common, pipe], help="compare with the BM25 ranking")
    c.add_argument("--index", required=True, help="index directory")
    c.add_argument("--out", dest="report_out", default=None, help="also write the report here")
    c.add_argument("query")

    bn = sub.add_parser("bench", parents=[common], help="indexing time vs corpus size")
    bn.add_argument("--sizes", type=_sizes, default=[250, 500, 1000, 2000])
    bn.add_argument("--out", dest="csv_out", default=None, help="CSV output path")
    bn.add_argument("--repeats", type=int, default=3)
    bn.add_argument("--max-size", type=int, default=200_000)
    bn.add_argument("--entities", type=int, default=20)
    bn.add_argument("--model", default=S, help="CRF model (default: train a small one)")
    bn.add_argument("--lexicon", default=S)
    bn.add_argument("--rules", default=S)
    return p


def _config_from_args(args) -> tuple[RunConfig, set]:
    ns = vars(args)
    cfg = RunConfig.from_file(ns["config"]) if "config" in ns else RunConfig()
    explicit = set()
    for dest, fname in _OPTION_FIELDS.items():
        if dest in ns:
            setattr(cfg, fname, ns[dest])
            explicit.add(fname)
    cfg.validate()
    return cfg, explicit


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.INFO
    if getattr(args, "quiet", False):
        level = logging.WARNING
    if getattr(args, "verbose", False):
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        cfg, explicit = _config_from_args(args)
        if args.command == "train":
            cmd_train(cfg, args.report)
        elif args.command == "index":
            cmd_index(cfg)
        elif args.command == "query":
            cmd_query(cfg, args.index, args.query, args.explain, explicit)
        elif args.command == "compare":
            cmd_compare(cfg, args.index, args.query, args.report_out, explicit)
        elif args.command == "bench":
            cmd_bench(cfg, args.sizes, args.csv_out, args.repeats, args.max_size, args.entities)
    except (QueryFailed, NoAspectFound) as exc:
        print(f"fuzzyrank: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except (InputError, CorpusError, LexiconError, CrfError, EmptyCorpus, OSError, ValueError) as exc:
        print(f"fuzzyrank: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
