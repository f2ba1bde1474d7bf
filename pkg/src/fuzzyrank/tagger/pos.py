"""Lexicon + suffix-rule part-of-speech tagging over a closed tag set."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class PosClass(str, enum.Enum):
    ADJ = "ADJ"
    ADV = "ADV"
    NOUN = "NOUN"
    VERB = "VERB"
    NEG = "NEG"
    OTHER = "OTHER"

    def __str__(self):
        return self.value


OPINION_CLASSES = (PosClass.ADV, PosClass.ADJ, PosClass.VERB, PosClass.NOUN)

DEFAULT_SUFFIX_RULES = (
    ("n't", PosClass.NEG),
    ("ly", PosClass.ADV),
    ("ous", PosClass.ADJ),
    ("ful", PosClass.ADJ),
    ("able", PosClass.ADJ),
    ("ive", PosClass.ADJ),
)


@dataclass
class PosLexicon:
    words: dict[str, PosClass] = field(default_factory=dict)
    suffix_rules: tuple[tuple[str, PosClass], ...] = DEFAULT_SUFFIX_RULES

    def __post_init__(self):
        self.words = {w.lower(): PosClass(p) for w, p in self.words.items()}

    def lookup(self, word: str) -> PosClass:
        lw = word.lower()
        tag = self.words.get(lw)
        if tag is not None:
            return tag
        for suffix, cls in self.suffix_rules:
            if lw.endswith(suffix) and len(lw) > len(suffix):
                return cls
        return PosClass.OTHER

    def to_dict(self):
        return {
            "words": {w: p.value for w, p in sorted(self.words.items())},
            "suffix_rules": [[s, p.value] for s, p in self.suffix_rules],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            {w: PosClass(p) for w, p in d["words"].items()},
            tuple((s, PosClass(p)) for s, p in d["suffix_rules"]),
        )


def read_pos_lexicon(path=None) -> PosLexicon:
    """Read ``word<TAB>POS`` lines; ``None`` loads the bundled English lexicon."""
    if path is None:
        text = resources.files("fuzzyrank.data").joinpath("pos_lexicon.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"POS lexicon line {lineno}: expected word<TAB>POS")
        try:
            words[parts[0].strip().lower()] = PosClass(parts[1].strip().upper())
        except ValueError:
            raise ValueError(f"POS lexicon line {lineno}: unknown class {parts[1]!r}") from None
    return PosLexicon(words)


def _surface(tok):
    return tok if isinstance(tok, str) else tok.surface


def pos_tag(sentence, lex: PosLexicon) -> list[PosClass]:
    return [lex.lookup(_surface(t)) for t in sentence]
