"""Aspect mentions decoded from CRF label sequences."""

from __future__ import annotations

from dataclasses import dataclass

from .crf import CrfModel, aspect_spans, crf_viterbi


@dataclass(frozen=True)
class AspectMention:
    term: str
    span: tuple[int, int]
    # ((entity_id, review_id), sentence index); None for free text such as queries
    sentence_ref: tuple[tuple[str, str], int] | None = None

    def __post_init__(self):
        start, end = self.span
        if not 0 <= start < end:
            raise ValueError(f"bad aspect span {self.span}")


def mentions_from_labels(tokens, labels, sentence_ref=None) -> list[AspectMention]:
    words = [t if isinstance(t, str) else t.surface for t in tokens]
    return [
        AspectMention(" ".join(w.lower() for w in words[s:e]), (s, e), sentence_ref)
        for s, e in aspect_spans(labels)
    ]


def extract_aspects(model: CrfModel, sentence) -> list[AspectMention]:
    """Viterbi-decode ``sentence`` (a corpus Sentence or a token list) into mentions."""
    tokens = getattr(sentence, "tokens", sentence)
    if not len(tokens):
        return []
    ref = None
    if hasattr(sentence, "review_ref"):
        ref = (sentence.review_ref, sentence.index)
    decoded = crf_viterbi(model, tokens)
    return mentions_from_labels(tokens, decoded.labels, ref)
