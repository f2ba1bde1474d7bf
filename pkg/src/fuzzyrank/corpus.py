"""Review ingestion, sentence splitting, tokenisation and corpus persistence."""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

CORPUS_FORMAT = "fuzzyrank-corpus"
CORPUS_VERSION = 1

_SENTENCE_END = re.compile(r"[.!?](?=\s|$)")
_TOKEN = re.compile(r"[^\W_]+(?:'+[^\W_]+)*")


class CorpusError(Exception):
    pass


class MalformedRecord(CorpusError):
    def __init__(self, line, reason="missing field"):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class DuplicateReview(CorpusError):
    def __init__(self, review_ref):
        super().__init__(f"duplicate review {review_ref[0]}/{review_ref[1]}")
        self.review_ref = review_ref


@dataclass(frozen=True)
class Token:
    surface: str
    position: int

    @property
    def lower(self) -> str:
        return self.surface.lower()


@dataclass(frozen=True)
class Sentence:
    review_ref: tuple[str, str]
    index: int
    text: str
    tokens: tuple[Token, ...]

    @property
    def words(self) -> list[str]:
        return [t.surface for t in self.tokens]


@dataclass(frozen=True)
class Review:
    entity_id: str
    review_id: str
    text: str
    # set when loaded from a persisted corpus
    stored: tuple[Sentence, ...] | None = field(default=None, compare=False, repr=False)

    @property
    def ref(self) -> tuple[str, str]:
        return (self.entity_id, self.review_id)

    def sentences(self) -> list[Sentence]:
        """Split into sentences, dropping those without any token.

        Indices stay dense: a punctuation-only fragment does not consume one.
        """
        if self.stored is not None:
            return list(self.stored)
        out = []
        for chunk in split_sentences(self.text):
            tokens = tokenize(chunk)
            if tokens:
                out.append(Sentence(self.ref, len(out), chunk, tuple(tokens)))
        return out


@dataclass
class Corpus:
    reviews: list[Review] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for r in self.reviews:
            if r.ref in seen:
                raise DuplicateReview(r.ref)
            seen.add(r.ref)

    def __len__(self):
        return len(self.reviews)

    def __iter__(self) -> Iterator[Review]:
        return iter(self.reviews)

    @property
    def entities(self) -> list[str]:
        return sorted({r.entity_id for r in self.reviews})

    def entity_texts(self) -> dict[str, str]:
        """Concatenated review text per entity, in corpus order."""
        docs: dict[str, list[str]] = {}
        for r in self.reviews:
            docs.setdefault(r.entity_id, []).append(r.text)
        return {e: " ".join(texts) for e, texts in docs.items()}


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!' or '?' when followed by whitespace or end of text.

    Delimiters stay attached to their sentence; surrounding whitespace is
    stripped. Whitespace-only pieces are dropped.
    """
    out = []
    start = 0
    for m in _SENTENCE_END.finditer(text):
        piece = text[start:m.end()].strip()
        if piece:
            out.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out


def tokenize(sentence: str) -> list[Token]:
    """Maximal runs of letters, digits and intra-word apostrophes."""
    return [Token(m.group(), i) for i, m in enumerate(_TOKEN.finditer(sentence))]


def _check_record(rec, line):
    if not isinstance(rec, dict):
        raise MalformedRecord(line, "not an object")
    for key in ("entity_id", "review_id", "text"):
        val = rec.get(key)
        if not isinstance(val, str) or (key != "text" and not val.strip()):
            raise MalformedRecord(line, f"missing field {key!r}")
    return Review(rec["entity_id"].strip(), rec["review_id"].strip(), rec["text"])


def _iter_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(lineno, f"invalid JSON ({exc.msg})") from None


def _iter_csv(path: Path) -> Iterable[tuple[int, dict]]:
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return
        missing = {"entity_id", "review_id", "text"} - set(reader.fieldnames)
        if missing:
            raise MalformedRecord(1, f"header lacks {sorted(missing)}")
        for rec in reader:
            yield reader.line_num, rec


def ingest_reviews(source, format: str | None = None) -> Corpus:
    """Read a JSONL or CSV review file into a :class:`Corpus`.

    ``format`` defaults to the file suffix (``.csv`` means CSV, anything
    else JSONL).
    """
    path = Path(source)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt not in ("jsonl", "csv"):
        raise ValueError(f"unknown review format {fmt!r}")
    rows = _iter_csv(path) if fmt == "csv" else _iter_jsonl(path)
    reviews = []
    seen = set()
    for lineno, rec in rows:
        review = _check_record(rec, lineno)
        if review.ref in seen:
            raise DuplicateReview(review.ref)
        seen.add(review.ref)
        reviews.append(review)
    return Corpus(reviews)


def save_corpus(corpus: Corpus, path) -> None:
    """Persist as a versioned header line followed by one JSON record per review.

    Each record carries the review fields plus its sentences as token lists,
    so a reload is token-for-token identical even if tokenisation changes.
    """
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        header = {"format": CORPUS_FORMAT, "version": CORPUS_VERSION, "reviews": len(corpus)}
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for r in corpus:
            rec = {
                "entity_id": r.entity_id,
                "review_id": r.review_id,
                "text": r.text,
                "sentences": [[s.text, s.words] for s in r.sentences()],
            }
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def load_corpus(path) -> Corpus:
    with Path(path).open(encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError:
            raise CorpusError(f"{path}: not a persisted corpus") from None
        if header.get("format") != CORPUS_FORMAT:
            raise CorpusError(f"{path}: not a persisted corpus")
        if header.get("version") != CORPUS_VERSION:
            raise CorpusError(f"{path}: unsupported corpus version {header.get('version')}")
        reviews = []
        for lineno, line in enumerate(fh, 2):
            rec = json.loads(line)
            ref = (rec["entity_id"], rec["review_id"])
            sents = tuple(
                Sentence(ref, i, text, tuple(Token(w, p) for p, w in enumerate(words)))
                for i, (text, words) in enumerate(rec["sentences"])
            )
            reviews.append(Review(ref[0], ref[1], rec["text"], sents))
    if len(reviews) != header.get("reviews"):
        raise CorpusError(f"{path}: header announces {header.get('reviews')} reviews, found {len(reviews)}")
    return Corpus(reviews)


def read_corpus(path, format: str | None = None) -> Corpus:
    """Load either a persisted corpus or a raw JSONL/CSV review file."""
    path = Path(path)
    if format is None:
        with path.open(encoding="utf-8") as fh:
            first = fh.readline()
        if CORPUS_FORMAT in first:
            return load_corpus(path)
    return ingest_reviews(path, format)
