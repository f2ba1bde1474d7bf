"""Entity scoring, query parsing, ranking and the BM25 baseline."""

from __future__ import annotations

import csv
import itertools
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import tokenize
from .fuzzy import FuzzyError, score_sentence
from .opinion import associate_opinions
from .tagger.aspects import AspectMention, extract_aspects
from .tagger.pos import pos_tag

AGGREGATIONS = ("mean", "sum")


class RankError(Exception):
    pass


class NoAspectFound(RankError):
    pass


class EmptyCorpus(RankError):
    pass


class UnknownEntity(RankError, KeyError):
    pass


class EntitySetMismatch(RankError):
    pass


# -- aggregation --------------------------------------------------------------


@dataclass(frozen=True)
class EntityAspectScore:
    entity_id: str
    aspect: str
    score: float
    support: int


def aggregate_entity_scores(scores: Iterable[tuple[str, str, float]], mode: str = "mean") -> list[EntityAspectScore]:
    """Combine signed sentence scores per (entity, aspect), sorted by key."""
    if mode not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
    groups: dict[tuple[str, str], list[float]] = defaultdict(list)
    for entity, aspect, value in scores:
        groups[(entity, aspect)].append(float(value))
    out = []
    for (entity, aspect), values in sorted(groups.items()):
        total = math.fsum(values)
        out.append(EntityAspectScore(entity, aspect, total / len(values) if mode == "mean" else total, len(values)))
    return out


SCORE_HEADER = ("entity_id", "aspect", "score", "support")


def save_score_table(rows: Sequence[EntityAspectScore], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(SCORE_HEADER)
        for r in rows:
            w.writerow((r.entity_id, r.aspect, repr(r.score), r.support))


def load_score_table(path) -> list[EntityAspectScore]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if tuple(header or ()) != SCORE_HEADER:
            raise RankError(f"{path}: bad score table header")
        return [EntityAspectScore(e, a, float(s), int(n)) for e, a, s, n in reader]


# -- queries ------------------------------------------------------------------


@dataclass(frozen=True)
class QueryAspect:
    term: str
    orientation: int
    strength: float
    label: str = ""


@dataclass(frozen=True)
class ParsedQuery:
    text: str
    aspects: tuple[QueryAspect, ...]

    @property
    def terms(self) -> list[str]:
        return [a.term for a in self.aspects]


def _vocabulary_mentions(words: Sequence[str], vocabulary: Iterable[str]) -> list[AspectMention]:
    """Greedy longest-match of known aspect terms, left to right."""
    lowered = [w.lower() for w in words]
    by_len = sorted({tuple(v.split()) for v in vocabulary}, key=len, reverse=True)
    out = []
    i = 0
    while i < len(lowered):
        for term in by_len:
            if tuple(lowered[i:i + len(term)]) == term:
                out.append(AspectMention(" ".join(term), (i, i + len(term))))
                i += len(term)
                break
        else:
            i += 1
    return out


def parse_query(query: str, pipeline) -> ParsedQuery:
    """Run a free-text query through the review pipeline.

    ``pipeline`` supplies ``model``, ``lexicon``, ``fuzzy``, ``window`` and
    ``negation``. A query aspect without opinion words means "want this
    aspect to be good": orientation +1, strength 1.
    """
    tokens = tokenize(query)
    if not tokens:
        raise NoAspectFound("empty query")
    words = [t.surface for t in tokens]
    mentions = extract_aspects(pipeline.model, tokens)
    if not mentions:
        mentions = _vocabulary_mentions(words, pipeline.model.aspect_vocabulary)
    if not mentions:
        raise NoAspectFound(f"no aspect found in query {query!r}")
    pos = pos_tag(words, pipeline.model.pos_lexicon)
    opinions = associate_opinions(
        words, pos, mentions, pipeline.lexicon, window=pipeline.window, negation=pipeline.negation
    )
    aspects = []
    for op in opinions:
        try:
            s = score_sentence(pipeline.fuzzy, op)
        except FuzzyError:
            aspects.append(QueryAspect(op.aspect.term, 1, 1.0, "bare aspect"))
        else:
            aspects.append(QueryAspect(op.aspect.term, s.orientation, s.strength, s.label))
    return ParsedQuery(query, tuple(aspects))


# -- ranking ------------------------------------------------------------------


@dataclass(frozen=True)
class RankedEntry:
    rank: int
    entity_id: str
    score: float


@dataclass(frozen=True)
class RankedList:
    entries: tuple[RankedEntry, ...] = ()

    @classmethod
    def from_scores(cls, scores: Mapping[str, float]) -> RankedList:
        """Descending score, ties by entity id; ranks are 1..n."""
        order = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        return cls(tuple(RankedEntry(i, e, float(s)) for i, (e, s) in enumerate(order, 1)))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def entity_ids(self) -> list[str]:
        return [e.entity_id for e in self.entries]

    def scores(self) -> dict[str, float]:
        return {e.entity_id: e.score for e in self.entries}

    def rank_of(self, entity_id: str) -> int:
        for e in self.entries:
            if e.entity_id == entity_id:
                return e.rank
        raise UnknownEntity(entity_id)

    def rerank(self) -> RankedList:
        return RankedList.from_scores(self.scores())

    def restrict(self, entity_ids: Iterable[str]) -> RankedList:
        keep = set(entity_ids)
        return RankedList.from_scores({e: s for e, s in self.scores().items() if e in keep})

    def format_table(self) -> str:
        lines = [f"{'rank':>4}  {'entity_id':<28} {'score':>10}"]
        lines += [f"{e.rank:>4}  {e.entity_id:<28} {e.score:>10.4f}" for e in self.entries]
        return "\n".join(lines)


def rank_entities(query: ParsedQuery, scores: Sequence[EntityAspectScore]) -> RankedList:
    """Sum of orientation * entity aspect score * strength over the query aspects."""
    table = {(s.entity_id, s.aspect): s.score for s in scores}
    totals: dict[str, float] = {}
    for entity in sorted({s.entity_id for s in scores}):
        parts = [
            qa.orientation * table[(entity, qa.term)] * qa.strength
            for qa in query.aspects
            if (entity, qa.term) in table
        ]
        if parts:
            totals[entity] = math.fsum(parts)
    return RankedList.from_scores(totals)


# -- BM25 -----------------------------------------------------------------------


def bm25_terms(text: str) -> list[str]:
    return [t.lower for t in tokenize(text)]


@dataclass
class Bm25Index:
    doc_ids: list[str]
    term_freqs: list[dict[str, int]]
    doc_freq: dict[str, int]
    doc_lengths: list[int]
    k1: float = 1.2
    b: float = 0.75
    _pos: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._pos = {d: i for i, d in enumerate(self.doc_ids)}

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def avgdl(self) -> float:
        return sum(self.doc_lengths) / self.n_docs

    def idf(self, term: str) -> float:
        df = self.doc_freq.get(term, 0)
        return math.log((self.n_docs - df + 0.5) / (df + 0.5) + 1.0)

    def to_dict(self) -> dict:
        return {
            "format": "fuzzyrank-bm25",
            "version": 1,
            "k1": self.k1,
            "b": self.b,
            "docs": [
                {"id": d, "length": n, "tf": dict(sorted(tf.items()))}
                for d, n, tf in zip(self.doc_ids, self.doc_lengths, self.term_freqs)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Bm25Index:
        if d.get("format") != "fuzzyrank-bm25":
            raise RankError("not a BM25 index")
        docs = d["docs"]
        tfs = [dict(doc["tf"]) for doc in docs]
        df = Counter(itertools.chain.from_iterable(tfs))
        return cls([doc["id"] for doc in docs], tfs, dict(df), [doc["length"] for doc in docs], d["k1"], d["b"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> Bm25Index:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def bm25_build(docs: Sequence[tuple[str, str]], k1: float = 1.2, b: float = 0.75) -> Bm25Index:
    """Index ``(entity_id, text)`` documents."""
    if k1 < 0:
        raise ValueError("k1 must be >= 0")
    if not 0.0 <= b <= 1.0:
        raise ValueError("b must be in [0, 1]")
    if not docs:
        raise EmptyCorpus("no documents to index")
    ids, tfs, lengths = [], [], []
    for doc_id, text in docs:
        terms = bm25_terms(text)
        ids.append(doc_id)
        tfs.append(dict(Counter(terms)))
        lengths.append(len(terms))
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate document id")
    if sum(lengths) == 0:
        raise EmptyCorpus("all documents are empty")
    df = Counter(itertools.chain.from_iterable(tfs))
    return Bm25Index(ids, tfs, dict(df), lengths, k1, b)


def bm25_score(index: Bm25Index, terms: Sequence[str], entity_id: str) -> float:
    try:
        i = index._pos[entity_id]
    except KeyError:
        raise UnknownEntity(entity_id) from None
    tf_doc = index.term_freqs[i]
    norm = index.k1 * (1.0 - index.b + index.b * index.doc_lengths[i] / index.avgdl)
    total = 0.0
    for term in terms:
        tf = tf_doc.get(term.lower(), 0)
        if tf:
            total += index.idf(term.lower()) * tf * (index.k1 + 1.0) / (tf + norm)
    return total


def bm25_rank(index: Bm25Index, terms: Sequence[str], entity_ids: Iterable[str] | None = None) -> RankedList:
    ids = index.doc_ids if entity_ids is None else list(entity_ids)
    return RankedList.from_scores({e: bm25_score(index, terms, e) for e in ids})


# -- comparison -----------------------------------------------------------------


@dataclass(frozen=True)
class RankComparison:
    kendall_tau: float | None
    spearman_rho: float | None
    # (entity_id, rank_a, score_a, rank_b, score_b), ordered by rank_a
    rows: tuple[tuple[str, int, float, int, float], ...]

    def format_tsv(self, names=("proposed", "bm25")) -> str:
        a, b = names
        lines = [f"entity_id\t{a}_rank\t{a}_score\t{b}_rank\t{b}_score"]
        lines += [f"{e}\t{ra}\t{sa:.4f}\t{rb}\t{sb:.4f}" for e, ra, sa, rb, sb in self.rows]
        fmt = lambda v: "n/a" if v is None else f"{v:.4f}"  # noqa: E731
        lines.append(f"# kendall_tau\t{fmt(self.kendall_tau)}")
        lines.append(f"# spearman_rho\t{fmt(self.spearman_rho)}")
        return "\n".join(lines) + "\n"


def kendall_tau(ranks_a: Sequence[int], ranks_b: Sequence[int]) -> float | None:
    """(concordant - discordant) / (n(n-1)/2) by counting every pair."""
    n = len(ranks_a)
    if n < 2:
        return None
    c = d = 0
    for i, j in itertools.combinations(range(n), 2):
        s = (ranks_a[i] - ranks_a[j]) * (ranks_b[i] - ranks_b[j])
        if s > 0:
            c += 1
        elif s < 0:
            d += 1
    return (c - d) / (n * (n - 1) / 2)


def spearman_rho(ranks_a: Sequence[int], ranks_b: Sequence[int]) -> float | None:
    n = len(ranks_a)
    if n < 2:
        return None
    d2 = sum((x - y) ** 2 for x, y in zip(ranks_a, ranks_b))
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


def compare_rankings(a: RankedList, b: RankedList) -> RankComparison:
    ents_a, ents_b = a.entity_ids, b.entity_ids
    if set(ents_a) != set(ents_b) or len(ents_a) != len(ents_b):
        raise EntitySetMismatch("rankings cover different entities")
    by_b = {e.entity_id: e for e in b}
    rows = tuple(
        (e.entity_id, e.rank, e.score, by_b[e.entity_id].rank, by_b[e.entity_id].score) for e in a
    )
    ra = [r[1] for r in rows]
    rb = [r[3] for r in rows]
    return RankComparison(kendall_tau(ra, rb), spearman_rho(ra, rb), rows)
