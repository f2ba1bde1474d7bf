"""Polarity lexicon and aspect/opinion-word association."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .tagger.aspects import AspectMention
from .tagger.pos import PosClass

DEFAULT_WINDOW = 5
NEGATION_REACH = 3
DEPENDENCY_HOPS = 2

_POS_ALIASES = {"a": "ADJ", "r": "ADV", "n": "NOUN", "v": "VERB"}
_FIELD = {PosClass.ADV: "adv", PosClass.ADJ: "adj", PosClass.VERB: "verb", PosClass.NOUN: "noun"}


class LexiconError(Exception):
    pass


class MalformedRow(LexiconError):
    def __init__(self, line, reason="expected word<TAB>pos<TAB>polarity"):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class PolarityOutOfRange(LexiconError):
    def __init__(self, word, value):
        super().__init__(f"polarity of {word!r} is {value}, outside [-1, 1]")
        self.word = word


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    pos: PosClass
    polarity: float


class Lexicon:
    """Prior polarities keyed by (lowercased word, POS class)."""

    def __init__(self, entries: Sequence[LexiconEntry] = ()):
        self._map: dict[tuple[str, PosClass], float] = {}
        for e in entries:
            if not -1.0 <= e.polarity <= 1.0:
                raise PolarityOutOfRange(e.word, e.polarity)
            self._map[(e.word.lower(), PosClass(e.pos))] = float(e.polarity)

    def __len__(self):
        return len(self._map)

    def __contains__(self, key):
        return key in self._map

    def polarity(self, word: str, pos: PosClass) -> float | None:
        return self._map.get((word.lower(), pos))

    def entries(self) -> list[LexiconEntry]:
        return [LexiconEntry(w, p, v) for (w, p), v in sorted(self._map.items())]


def default_lexicon_path() -> Path:
    return Path(str(resources.files("fuzzyrank.data").joinpath("polarity_lexicon.tsv")))


def load_lexicon(path) -> Lexicon:
    """Read ``word<TAB>POS<TAB>polarity`` rows; ``#`` lines are comments."""
    entries = []
    seen = set()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise MalformedRow(lineno)
            word, pos, value = (p.strip() for p in parts)
            pos = _POS_ALIASES.get(pos.lower(), pos.upper())
            try:
                cls = PosClass(pos)
                polarity = float(value)
            except ValueError:
                raise MalformedRow(lineno) from None
            if not word:
                raise MalformedRow(lineno, "empty word")
            if not -1.0 <= polarity <= 1.0:
                raise PolarityOutOfRange(word, polarity)
            key = (word.lower(), cls)
            if key in seen:
                raise MalformedRow(lineno, f"duplicate entry {word}/{cls}")
            seen.add(key)
            entries.append(LexiconEntry(word.lower(), cls, polarity))
    return Lexicon(entries)


@dataclass(frozen=True)
class OpinionTuple:
    aspect: AspectMention
    adv: float | None = None
    adj: float | None = None
    verb: float | None = None
    noun: float | None = None
    negated: bool = False
    # POS field -> (word, token position) of the selected opinion word
    words: dict = field(default_factory=dict, compare=False)

    def polarities(self) -> dict[str, float]:
        return {k: v for k in ("adv", "adj", "verb", "noun") if (v := getattr(self, k)) is not None}

    @property
    def empty(self) -> bool:
        return not self.polarities()


def _span_distance(i, span):
    start, end = span
    return start - i if i < start else i - end + 1


def _aspect_head(span, heads):
    start, end = span
    for i in range(start, end):
        h = heads[i]
        if h < start or h >= end:
            return i
    return end - 1


def _dependency_reach(root, heads, hops):
    adj: dict[int, list[int]] = {i: [] for i in range(len(heads))}
    for dep, head in enumerate(heads):
        if 0 <= head < len(heads):
            adj[dep].append(head)
            adj[head].append(dep)
    dist = {root: 0}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        if dist[node] == hops:
            continue
        for nxt in adj[node]:
            if nxt not in dist:
                dist[nxt] = dist[node] + 1
                queue.append(nxt)
    return set(dist)


def associate_opinions(
    tokens,
    pos: Sequence[PosClass],
    aspects: Sequence[AspectMention],
    lex: Lexicon,
    deps: Sequence[int] | None = None,
    *,
    window: int = DEFAULT_WINDOW,
    negation: bool = True,
) -> list[OpinionTuple]:
    """One opinion tuple per aspect mention.

    Candidates are lexicon-scored ADV/ADJ/VERB/NOUN tokens outside every
    aspect span, either within ``window`` tokens of the mention or, when
    ``deps`` (0-based head index per token, -1 for root) is given, within
    two arcs of the mention's head. Per POS class the candidate nearest the
    mention wins, leftmost on ties.
    """
    words = [t if isinstance(t, str) else t.surface for t in tokens]
    if len(pos) != len(words):
        raise ValueError("POS tags are not aligned with tokens")
    if deps is not None and len(deps) != len(words):
        raise ValueError("dependency heads are not aligned with tokens")
    inside = set()
    for a in aspects:
        inside.update(range(*a.span))

    out = []
    for a in aspects:
        if deps is not None:
            reach = _dependency_reach(_aspect_head(a.span, deps), deps, DEPENDENCY_HOPS)
        best: dict[PosClass, tuple[int, int, float]] = {}
        for i, (w, p) in enumerate(zip(words, pos)):
            if p not in _FIELD or i in inside:
                continue
            if deps is not None:
                if i not in reach:
                    continue
            elif _span_distance(i, a.span) > window:
                continue
            value = lex.polarity(w, p)
            if value is None:
                continue
            key = (_span_distance(i, a.span), i)
            if p not in best or key < best[p][:2]:
                best[p] = (*key, value)

        negated = False
        if negation:
            for _, i, _ in best.values():
                if any(pos[j] == PosClass.NEG for j in range(max(0, i - NEGATION_REACH), i)):
                    negated = True
                    break
        fields = {_FIELD[p]: v for p, (_, _, v) in best.items()}
        chosen = {_FIELD[p]: (words[i].lower(), i) for p, (_, i, _) in best.items()}
        out.append(OpinionTuple(a, negated=negated, words=chosen, **fields))
    return out


def parse_dependencies(text: str) -> dict[tuple[str, int], list[int]]:
    """Parse CoNLL-U-like blocks into 0-based head lists keyed by (review_id, sentence index).

    Each block starts with ``# review_id = ...`` and ``# sentence = N``
    comments, then rows whose first three tab-separated columns are ID
    (1-based), FORM and HEAD (0 = root).
    """
    out: dict[tuple[str, int], list[int]] = {}
    meta: dict[str, str] = {}
    heads: list[int] = []

    def flush():
        if heads:
            if "review_id" not in meta or "sentence" not in meta:
                raise ValueError("dependency block lacks review_id/sentence comments")
            out[(meta["review_id"], int(meta["sentence"]))] = list(heads)
        heads.clear()
        meta.clear()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            flush()
            continue
        if line.startswith("#"):
            if heads:
                flush()
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) < 3:
            raise ValueError(f"line {lineno}: expected ID<TAB>FORM<TAB>HEAD")
        if int(cols[0]) != len(heads) + 1:
            raise ValueError(f"line {lineno}: token ids must be dense from 1")
        heads.append(int(cols[2]) - 1)
    flush()
    return out


def load_dependencies(path) -> dict[tuple[str, int], list[int]]:
    return parse_dependencies(Path(path).read_text(encoding="utf-8"))
