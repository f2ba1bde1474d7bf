"""CoNLL-style training data: ``surface<TAB>label`` per line, blank line between sentences."""

from __future__ import annotations

from pathlib import Path

from .crf import CrfError, LabeledSequence


class MalformedTrainingData(CrfError):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line


def parse_conll(text: str) -> list[LabeledSequence]:
    out = []
    tokens: list[str] = []
    labels: list[str] = []
    start_line = 1

    def flush():
        if tokens:
            try:
                out.append(LabeledSequence(tuple(tokens), tuple(labels)))
            except CrfError as exc:
                raise MalformedTrainingData(start_line, str(exc)) from None
        tokens.clear()
        labels.clear()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            start_line = lineno + 1
            continue
        if line.startswith("#") and not tokens:
            start_line = lineno + 1
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise MalformedTrainingData(lineno, "expected surface<TAB>label")
        tokens.append(parts[0])
        labels.append(parts[1].strip())
    flush()
    return out


def read_conll(path) -> list[LabeledSequence]:
    return parse_conll(Path(path).read_text(encoding="utf-8"))


def format_conll(data) -> str:
    blocks = ["\n".join(f"{t}\t{y}" for t, y in zip(ex.tokens, ex.labels)) for ex in data]
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def write_conll(data, path) -> None:
    Path(path).write_text(format_conll(data), encoding="utf-8")
