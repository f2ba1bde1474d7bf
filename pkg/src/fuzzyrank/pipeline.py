"""End-to-end review indexing: tag, associate, fuzzy-score, aggregate."""

from __future__ import annotations

import csv
import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, Review
from .fuzzy import FuzzySystem, NoApplicableRule, NoOpinionWords, score_sentence
from .opinion import DEFAULT_WINDOW, Lexicon, associate_opinions
from .rank import EntityAspectScore, aggregate_entity_scores
from .tagger.aspects import extract_aspects
from .tagger.crf import CrfModel
from .tagger.pos import pos_tag

log = logging.getLogger(__name__)

STAGES = ("tag", "associate", "score")


@dataclass(frozen=True)
class SentenceRecord:
    entity_id: str
    review_id: str
    sentence: int
    aspect: str
    signed_score: float
    strength: float
    label: str
    words: str
    text: str


@dataclass
class ReviewResult:
    records: list[SentenceRecord] = field(default_factory=list)
    failures: Counter = field(default_factory=Counter)
    timings: dict = field(default_factory=lambda: dict.fromkeys(STAGES, 0.0))
    sentences: int = 0
    mentions: int = 0


@dataclass
class IndexResult:
    records: list[SentenceRecord]
    scores: list[EntityAspectScore]
    failures: Counter
    timings: dict
    sentences: int
    mentions: int


@dataclass
class Pipeline:
    model: CrfModel
    lexicon: Lexicon
    fuzzy: FuzzySystem = field(default_factory=FuzzySystem)
    window: int = DEFAULT_WINDOW
    negation: bool = True
    # (review_id, sentence index) -> 0-based head per token
    dependencies: dict | None = None

    def process_review(self, review: Review) -> ReviewResult:
        res = ReviewResult()
        clock = time.perf_counter
        for sent in review.sentences():
            res.sentences += 1
            t0 = clock()
            words = sent.words
            pos = pos_tag(words, self.model.pos_lexicon)
            mentions = extract_aspects(self.model, sent)
            t1 = clock()
            res.timings["tag"] += t1 - t0
            if not mentions:
                continue
            res.mentions += len(mentions)
            heads = None
            if self.dependencies is not None:
                heads = self.dependencies.get((review.review_id, sent.index))
                if heads is not None and len(heads) != len(words):
                    res.failures["dependency_mismatch"] += 1
                    heads = None
            opinions = associate_opinions(
                words, pos, mentions, self.lexicon, heads, window=self.window, negation=self.negation
            )
            t2 = clock()
            res.timings["associate"] += t2 - t1
            for op in opinions:
                try:
                    s = score_sentence(self.fuzzy, op)
                except NoOpinionWords:
                    res.failures["no_opinion_words"] += 1
                    continue
                except NoApplicableRule:
                    res.failures["no_applicable_rule"] += 1
                    continue
                chosen = ",".join(f"{w}/{k}" for k, (w, _) in sorted(op.words.items(), key=lambda kv: kv[1][1]))
                res.records.append(SentenceRecord(
                    review.entity_id, review.review_id, sent.index, op.aspect.term,
                    s.signed_score, s.strength, s.label, chosen, sent.text,
                ))
            res.timings["score"] += clock() - t2
        return res

    def index_corpus(self, corpus: Corpus, threads: int = 1, aggregation: str = "mean") -> IndexResult:
        """Process every review and aggregate; output is independent of ``threads``.

        Results are merged in corpus order regardless of completion order.
        """
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(self.process_review, corpus.reviews))
        else:
            results = [self.process_review(r) for r in corpus.reviews]

        records: list[SentenceRecord] = []
        failures: Counter = Counter()
        timings = dict.fromkeys(STAGES, 0.0)
        n_sent = n_ment = 0
        for res in results:
            records.extend(res.records)
            failures.update(res.failures)
            n_sent += res.sentences
            n_ment += res.mentions
            for k, v in res.timings.items():
                timings[k] += v
        t0 = time.perf_counter()
        scores = aggregate_entity_scores(((r.entity_id, r.aspect, r.signed_score) for r in records), aggregation)
        timings["aggregate"] = time.perf_counter() - t0
        return IndexResult(records, scores, failures, timings, n_sent, n_ment)


SENTENCE_HEADER = (
    "entity_id", "review_id", "sentence", "aspect", "signed_score", "strength", "label", "opinion_words", "text",
)


def save_sentence_records(records, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(SENTENCE_HEADER)
        for r in records:
            w.writerow((r.entity_id, r.review_id, r.sentence, r.aspect, repr(r.signed_score),
                        repr(r.strength), r.label, r.words, r.text))


def load_sentence_records(path) -> list[SentenceRecord]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader, None)
        return [
            SentenceRecord(e, rid, int(i), a, float(s), float(st), lab, w, txt)
            for e, rid, i, a, s, st, lab, w, txt in reader
        ]
