"""First-order linear-chain CRF over BIO aspect labels.

Weights are stored densely: one row of ``len(LABELS)`` emission weights per
observed attribute string, plus a label-by-label transition matrix. A
feature is the pair (attribute, label); attributes unseen at training time
are ignored at decode time, but suffix and POS attributes still fire for
unknown words.

Training, scoring and the partition function treat all ``3**T`` labelings
as admissible. Decoding additionally forbids BIO-invalid paths (``I-ASP``
at the start or after ``O``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .pos import PosLexicon, pos_tag, read_pos_lexicon

LABELS = ("B-ASP", "I-ASP", "O")
B_ASP, I_ASP, O = 0, 1, 2
LABEL_INDEX = {lab: i for i, lab in enumerate(LABELS)}

DEFAULT_TEMPLATES = ("word", "lower", "suf2", "suf3", "pos", "pos-1", "pos+1")
MODEL_FORMAT = "fuzzyrank-crf"
MODEL_VERSION = 1

START_PENALTY = np.array([0.0, -np.inf, 0.0])
TRANSITION_PENALTY = np.zeros((3, 3))
TRANSITION_PENALTY[O, I_ASP] = -np.inf


class CrfError(Exception):
    pass


class LengthMismatch(CrfError):
    pass


class EmptySequence(CrfError):
    pass


class EmptyTrainingSet(CrfError):
    pass


class InvalidLabels(CrfError):
    pass


def _surface(tok):
    return tok if isinstance(tok, str) else tok.surface


def is_valid_bio(labels: Sequence[str]) -> bool:
    prev = "O"
    for lab in labels:
        if lab not in LABEL_INDEX:
            return False
        if lab == "I-ASP" and prev == "O":
            return False
        prev = lab
    return True


@dataclass(frozen=True)
class LabeledSequence:
    tokens: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(_surface(t) for t in self.tokens))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.tokens) != len(self.labels):
            raise LengthMismatch(f"{len(self.tokens)} tokens but {len(self.labels)} labels")
        if not is_valid_bio(self.labels):
            raise InvalidLabels(f"not a valid BIO sequence: {' '.join(self.labels)}")

    def __len__(self):
        return len(self.tokens)


def aspect_spans(labels: Sequence[str]) -> list[tuple[int, int]]:
    """Half-open spans of maximal ``B-ASP (I-ASP)*`` runs."""
    spans = []
    start = None
    for i, lab in enumerate(labels):
        if lab == "B-ASP":
            if start is not None:
                spans.append((start, i))
            start = i
        elif lab == "I-ASP" and start is not None:
            continue
        else:
            if start is not None:
                spans.append((start, i))
            start = None
    if start is not None:
        spans.append((start, len(labels)))
    return spans


def token_attributes(words: Sequence[str], pos: Sequence, templates=DEFAULT_TEMPLATES) -> list[list[str]]:
    """Attribute strings per token, e.g. ``word=Handling`` or ``pos-1=ADV``."""
    n = len(words)
    out = []
    for i, w in enumerate(words):
        lw = w.lower()
        attrs = []
        for tpl in templates:
            if tpl == "word":
                attrs.append("word=" + w)
            elif tpl == "lower":
                attrs.append("lower=" + lw)
            elif tpl == "suf2":
                attrs.append("suf2=" + lw[-2:])
            elif tpl == "suf3":
                attrs.append("suf3=" + lw[-3:])
            elif tpl == "pos":
                attrs.append("pos=" + str(pos[i]))
            elif tpl == "pos-1":
                attrs.append("pos-1=" + (str(pos[i - 1]) if i > 0 else "BOS"))
            elif tpl == "pos+1":
                attrs.append("pos+1=" + (str(pos[i + 1]) if i + 1 < n else "EOS"))
            else:
                raise ValueError(f"unknown feature template {tpl!r}")
        out.append(attrs)
    return out


@dataclass
class CrfModel:
    attributes: dict[str, int]
    emission: np.ndarray
    transition: np.ndarray
    templates: tuple[str, ...] = DEFAULT_TEMPLATES
    pos_lexicon: PosLexicon = field(default_factory=read_pos_lexicon)
    aspect_vocabulary: tuple[str, ...] = ()

    labels = LABELS

    def __post_init__(self):
        self.emission = np.asarray(self.emission, dtype=np.float64).reshape(len(self.attributes), len(LABELS))
        self.transition = np.asarray(self.transition, dtype=np.float64).reshape(len(LABELS), len(LABELS))
        if not (np.isfinite(self.emission).all() and np.isfinite(self.transition).all()):
            raise CrfError("CRF weights must be finite")

    @classmethod
    def zeros(cls, attributes: Sequence[str] = (), **kw) -> CrfModel:
        attrs = {a: i for i, a in enumerate(dict.fromkeys(attributes))}
        return cls(attrs, np.zeros((len(attrs), len(LABELS))), np.zeros((len(LABELS), len(LABELS))), **kw)

    @classmethod
    def from_features(cls, features: dict[tuple[str, str], float], transitions=None, **kw) -> CrfModel:
        """Build from ``{(attribute, label): weight}`` and optional ``{(prev, cur): weight}``."""
        model = cls.zeros([a for a, _ in features], **kw)
        for (attr, lab), w in features.items():
            model.emission[model.attributes[attr], LABEL_INDEX[lab]] = w
        for (prev, cur), w in (transitions or {}).items():
            model.transition[LABEL_INDEX[prev], LABEL_INDEX[cur]] = w
        return model

    @property
    def n_weights(self) -> int:
        return self.emission.size + self.transition.size

    def weights(self) -> np.ndarray:
        """Flat weight vector: emission rows (attribute-major) then transitions."""
        return np.concatenate([self.emission.ravel(), self.transition.ravel()])

    def set_weights(self, vec) -> None:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.n_weights,):
            raise ValueError(f"expected {self.n_weights} weights, got shape {vec.shape}")
        k = self.emission.size
        self.emission = vec[:k].reshape(self.emission.shape).copy()
        self.transition = vec[k:].reshape(self.transition.shape).copy()

    def copy(self) -> CrfModel:
        return CrfModel(
            dict(self.attributes), self.emission.copy(), self.transition.copy(),
            self.templates, self.pos_lexicon, self.aspect_vocabulary,
        )

    def encode(self, tokens) -> tuple[np.ndarray, np.ndarray]:
        """Known-attribute ids for each token in CSR layout ``(ids, offsets)``."""
        words = [_surface(t) for t in tokens]
        pos = pos_tag(words, self.pos_lexicon)
        ids: list[int] = []
        offsets = [0]
        for attrs in token_attributes(words, pos, self.templates):
            for a in attrs:
                j = self.attributes.get(a)
                if j is not None:
                    ids.append(j)
            offsets.append(len(ids))
        return np.asarray(ids, dtype=np.int64), np.asarray(offsets, dtype=np.int64)

    def emissions(self, tokens, encoded=None) -> np.ndarray:
        ids, offsets = encoded if encoded is not None else self.encode(tokens)
        return kernels.emission_scores(self.emission, ids, offsets)

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        names = sorted(self.attributes, key=self.attributes.__getitem__)
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "labels": list(LABELS),
            "templates": list(self.templates),
            "attributes": names,
            "emission": self.emission.tolist(),
            "transition": self.transition.tolist(),
            "aspect_vocabulary": list(self.aspect_vocabulary),
            "pos_lexicon": self.pos_lexicon.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> CrfModel:
        if d.get("format") != MODEL_FORMAT:
            raise CrfError("not a fuzzyrank CRF model")
        if d.get("version") != MODEL_VERSION:
            raise CrfError(f"unsupported model version {d.get('version')}")
        if tuple(d["labels"]) != LABELS:
            raise CrfError(f"label alphabet must be {LABELS}")
        attrs = {a: i for i, a in enumerate(d["attributes"])}
        return cls(
            attrs,
            np.asarray(d["emission"], dtype=np.float64).reshape(len(attrs), len(LABELS)),
            np.asarray(d["transition"], dtype=np.float64),
            tuple(d["templates"]),
            PosLexicon.from_dict(d["pos_lexicon"]),
            tuple(d.get("aspect_vocabulary", ())),
        )

    def save(self, path) -> None:
        # float repr round-trips exactly through json
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        Path(path).write_text(text + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> CrfModel:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _label_ids(labels) -> np.ndarray:
    try:
        return np.asarray([LABEL_INDEX[lab] for lab in labels], dtype=np.int64)
    except KeyError as exc:
        raise InvalidLabels(f"unknown label {exc.args[0]!r}") from None


def crf_score(model: CrfModel, seq, labels) -> float:
    """Unnormalised log-score: emission weights plus transitions along the chain."""
    if len(seq) != len(labels):
        raise LengthMismatch(f"{len(seq)} tokens but {len(labels)} labels")
    if not len(seq):
        return 0.0
    y = _label_ids(labels)
    em = model.emissions(seq)
    total = float(em[np.arange(len(y)), y].sum())
    total += float(model.transition[y[:-1], y[1:]].sum())
    return total


def crf_log_partition(model: CrfModel, seq) -> float:
    if not len(seq):
        raise EmptySequence("log partition of an empty sequence")
    _, log_z = kernels.forward(model.emissions(seq), model.transition)
    return float(log_z)


def crf_marginals(model: CrfModel, seq) -> np.ndarray:
    """Per-position label marginals, shape ``(T, 3)``."""
    if not len(seq):
        raise EmptySequence("marginals of an empty sequence")
    em = model.emissions(seq)
    alpha, log_z = kernels.forward(em, model.transition)
    beta = kernels.backward(em, model.transition)
    unary, _ = kernels.marginals(em, model.transition, alpha, beta, log_z)
    return unary


def crf_viterbi(model: CrfModel, seq) -> LabeledSequence:
    """Best BIO-valid labeling; ties go to the lower label index while backtracking."""
    if not len(seq):
        raise EmptySequence("cannot decode an empty sequence")
    path, _ = kernels.viterbi(model.emissions(seq), model.transition, START_PENALTY, TRANSITION_PENALTY)
    return LabeledSequence(tuple(_surface(t) for t in seq), tuple(LABELS[int(i)] for i in path))


def _sequence_stats(model, encoded, gold):
    """Log-likelihood of ``gold`` plus its gradient contributions."""
    ids, offsets = encoded
    em = kernels.emission_scores(model.emission, ids, offsets)
    trans = model.transition
    alpha, log_z = kernels.forward(em, trans)
    beta = kernels.backward(em, trans)
    unary, pair = kernels.marginals(em, trans, alpha, beta, log_z)

    T = len(gold)
    diff = -unary
    diff[np.arange(T), gold] += 1.0
    g_em = np.zeros_like(model.emission)
    token_of = np.repeat(np.arange(T), np.diff(offsets))
    np.add.at(g_em, ids, diff[token_of])

    g_tr = -pair
    np.add.at(g_tr, (gold[:-1], gold[1:]), 1.0)

    score = em[np.arange(T), gold].sum() + trans[gold[:-1], gold[1:]].sum()
    return float(score - log_z), g_em, g_tr


def _prepare(model, batch):
    out = []
    for ex in batch:
        if len(ex.tokens) != len(ex.labels):
            raise LengthMismatch(f"{len(ex.tokens)} tokens but {len(ex.labels)} labels")
        if not len(ex.tokens):
            raise EmptySequence("empty training sequence")
        out.append((model.encode(ex.tokens), _label_ids(ex.labels)))
    return out


def crf_log_likelihood(model: CrfModel, batch: Sequence[LabeledSequence], l2: float = 0.0) -> float:
    """Mean conditional log-likelihood minus ``l2 / 2 * ||w||^2``."""
    if not batch:
        raise EmptyTrainingSet("empty batch")
    total = sum(_sequence_stats(model, enc, y)[0] for enc, y in _prepare(model, batch))
    w = model.weights()
    return total / len(batch) - 0.5 * l2 * float(w @ w)


def crf_gradient(model: CrfModel, batch: Sequence[LabeledSequence], l2: float = 0.0) -> np.ndarray:
    """Gradient of :func:`crf_log_likelihood` as a flat vector (see ``CrfModel.weights``)."""
    if not batch:
        raise EmptyTrainingSet("empty batch")
    g_em = np.zeros_like(model.emission)
    g_tr = np.zeros_like(model.transition)
    # fixed summation order keeps the result reproducible
    for enc, y in _prepare(model, batch):
        _, e, t = _sequence_stats(model, enc, y)
        g_em += e
        g_tr += t
    grad = np.concatenate([g_em.ravel(), g_tr.ravel()]) / len(batch)
    return grad - l2 * model.weights()


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.1
    l2: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate < 0 or not math.isfinite(self.learning_rate):
            raise ValueError("learning rate must be finite and >= 0")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")


def training_vocabulary(data: Sequence[LabeledSequence], templates, pos_lexicon) -> list[str]:
    seen: dict[str, None] = {}
    for ex in data:
        pos = pos_tag(ex.tokens, pos_lexicon)
        for attrs in token_attributes(ex.tokens, pos, templates):
            for a in attrs:
                seen.setdefault(a)
    return sorted(seen)


def aspect_terms(data: Sequence[LabeledSequence]) -> tuple[str, ...]:
    terms = set()
    for ex in data:
        for s, e in aspect_spans(ex.labels):
            terms.add(" ".join(t.lower() for t in ex.tokens[s:e]))
    return tuple(sorted(terms))


def crf_train(
    data: Sequence[LabeledSequence],
    config: TrainConfig = TrainConfig(),
    *,
    pos_lexicon: PosLexicon | None = None,
    templates=DEFAULT_TEMPLATES,
    callback: Callable[[int, CrfModel], None] | None = None,
) -> CrfModel:
    """Per-example stochastic gradient ascent on the L2-regularised likelihood.

    Examples are visited in a fresh seeded permutation each epoch. The step
    for example ``i`` is ``lr * (grad_i - l2 * w)``. ``callback(epoch, model)``
    runs after every epoch (epoch 0 is the initial model).
    """
    if not data:
        raise EmptyTrainingSet("no training sequences")
    pos_lexicon = pos_lexicon or read_pos_lexicon()
    model = CrfModel.zeros(
        training_vocabulary(data, templates, pos_lexicon),
        templates=tuple(templates),
        pos_lexicon=pos_lexicon,
        aspect_vocabulary=aspect_terms(data),
    )
    prepared = _prepare(model, data)
    rng = np.random.default_rng(config.seed)
    lr, l2 = config.learning_rate, config.l2
    if callback:
        callback(0, model)
    for epoch in range(1, config.epochs + 1):
        for i in rng.permutation(len(prepared)):
            enc, y = prepared[i]
            _, g_em, g_tr = _sequence_stats(model, enc, y)
            if lr == 0.0:
                continue
            if l2:
                g_em -= l2 * model.emission
                g_tr -= l2 * model.transition
            model.emission += lr * g_em
            model.transition += lr * g_tr
        if callback:
            callback(epoch, model)
    return model
