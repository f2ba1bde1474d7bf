"""Seeded synthetic car-review text for fixtures and benchmarks."""

from __future__ import annotations

import random

from .corpus import Corpus, Review
from .tagger.crf import LabeledSequence

ASPECTS = (
    "handling", "mileage", "brakes", "interiors", "exteriors", "engine", "seats",
    "steering", "suspension", "transmission", "sound system", "fuel economy", "cargo space",
)
INTENSIFIERS = ("very", "extremely", "incredibly", "really", "quite", "rather", "fairly", "somewhat", "slightly")
POSITIVE = ("excellent", "superb", "great", "impressive", "reliable", "stable", "comfortable",
            "responsive", "good", "smooth", "precise", "solid", "roomy", "nice", "quiet", "fine", "decent")
NEGATIVE = ("terrible", "awful", "disappointing", "unreliable", "poor", "bad", "harsh", "sloppy",
            "cramped", "noisy", "weak", "vague", "mediocre")
POS_VERBS = ("love", "enjoy", "like")
NEG_VERBS = ("hate", "dislike")
FILLER = (
    "We drove it for {n} miles.",
    "I bought it {n} years ago.",
    "The car is {adj}.",
    "My wife drives it to work every day.",
    "The dealer was friendly.",
    "It replaced our old sedan.",
)

# aspect slot is {asp}; everything else is a literal or an opinion slot
TEMPLATES = (
    "The {asp} is {adv} {adj}.",
    "{Adv} {adj} {asp}.",
    "The car has {adj} {asp}.",
    "I {verb} the {asp}.",
    "The {asp} is not {adj}.",
    "The car is {adj} having {adv} {adj2} {asp}.",
    "{Adj} {asp}.",
    "The {asp} of this car is {adj} and the {asp2} is {adv} {adj2}.",
    "{Asp}.",
    "The {asp} feels {adj} on the highway.",
    "Never had a {adj} {asp} like this.",
)


def _fill(template: str, rng: random.Random, aspects=ASPECTS) -> tuple[list[str], list[str]]:
    asp, asp2 = rng.sample(aspects, 2)
    adj_pool = POSITIVE + NEGATIVE
    slots = {
        "asp": asp, "asp2": asp2,
        "adv": rng.choice(INTENSIFIERS), "adj": rng.choice(adj_pool), "adj2": rng.choice(adj_pool),
        "verb": rng.choice(POS_VERBS + NEG_VERBS), "n": str(rng.randint(1, 9)),
    }
    tokens: list[str] = []
    labels: list[str] = []
    for piece in template.rstrip(".").split():
        key = piece.strip("{}")
        if piece.startswith("{"):
            value = slots[key.lower()]
            if key[0].isupper():
                value = value[0].upper() + value[1:]
            words = value.split()
            if key.lower() in ("asp", "asp2"):
                labels += ["B-ASP"] + ["I-ASP"] * (len(words) - 1)
            else:
                labels += ["O"] * len(words)
            tokens += words
        else:
            tokens.append(piece)
            labels.append("O")
    return tokens, labels


def training_sequences(n: int, seed: int = 0) -> list[LabeledSequence]:
    """``n`` BIO-annotated sentences; roughly one in five carries no aspect."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        if rng.random() < 0.2:
            tmpl = rng.choice(FILLER)
            text = tmpl.format(n=rng.randint(2, 90), adj=rng.choice(POSITIVE + NEGATIVE)).rstrip(".")
            words = text.split()
            out.append(LabeledSequence(tuple(words), ("O",) * len(words)))
        else:
            tokens, labels = _fill(rng.choice(TEMPLATES), rng)
            out.append(LabeledSequence(tuple(tokens), tuple(labels)))
    return out


def _opinion_phrase(quality: float, rng: random.Random) -> tuple[str, str]:
    """(adverb, adjective) whose polarity tracks ``quality`` in [-1, 1] with noise."""
    q = max(-1.0, min(1.0, quality + rng.gauss(0.0, 0.25)))
    pool = POSITIVE if q >= 0 else NEGATIVE
    # pools run strongest-first
    idx = min(len(pool) - 1, int((1.0 - abs(q)) * len(pool)))
    adv_idx = min(len(INTENSIFIERS) - 1, int((1.0 - abs(q)) * len(INTENSIFIERS)))
    return INTENSIFIERS[adv_idx], pool[idx]


def review_text(quality: dict[str, float], rng: random.Random, n_sentences: int) -> str:
    parts = []
    for _ in range(n_sentences):
        if rng.random() < 0.25:
            parts.append(rng.choice(FILLER).format(n=rng.randint(2, 90), adj=rng.choice(POSITIVE)))
            continue
        asp = rng.choice(list(quality))
        adv, adj = _opinion_phrase(quality[asp], rng)
        form = rng.randrange(3)
        if form == 0:
            parts.append(f"The {asp} is {adv} {adj}.")
        elif form == 1:
            parts.append(f"{adv.capitalize()} {adj} {asp}.")
        else:
            parts.append(f"The car has {adv} {adj} {asp}.")
    return " ".join(parts)


def synthetic_corpus(n_reviews: int, n_entities: int = 20, seed: int = 0, sentences=(2, 5)) -> Corpus:
    """Random corpus; each entity has a hidden quality per aspect."""
    rng = random.Random(seed)
    entities = [f"model_{i:03d}" for i in range(n_entities)]
    quality = {e: {a: rng.uniform(-1, 1) for a in ASPECTS} for e in entities}
    reviews = []
    for i in range(n_reviews):
        e = entities[rng.randrange(n_entities)]
        text = review_text(quality[e], rng, rng.randint(*sentences))
        reviews.append(Review(e, f"r{i:06d}", text))
    return Corpus(reviews)


PLANTED_PHRASES = (
    ("extremely", "excellent"),
    ("fairly", "decent"),
    ("very", "poor"),
)


def planted_corpus(entities=("alpha_car", "beta_car", "gamma_car"), aspect="handling", reviews_per_entity=4) -> Corpus:
    """Entities whose opinions on ``aspect`` are strictly ordered best to worst.

    Each entity also gets a filler sentence and an opinion on seats that runs
    in the opposite order, so ranking must isolate the requested aspect.
    """
    if len(entities) > len(PLANTED_PHRASES):
        raise ValueError(f"at most {len(PLANTED_PHRASES)} planted entities")
    reviews = []
    phrases = PLANTED_PHRASES[:len(entities)]
    for e, (adv, adj), (_, other) in zip(entities, phrases, reversed(phrases)):
        for k in range(reviews_per_entity):
            text = f"The {aspect} is {adv} {adj}. We drove it for {k + 2} miles. The seats are {other}."
            reviews.append(Review(e, f"{e}-r{k}", text))
    return Corpus(reviews)
