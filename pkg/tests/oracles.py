"""Slow, obviously-correct reference implementations used by the tests.

Nothing here calls the forward/backward or Viterbi kernels: scores are summed
weight by weight and every labeling is enumerated explicitly.
"""

import itertools
import math

import numpy as np

from fuzzyrank.tagger.crf import CrfModel, LabeledSequence, is_valid_bio, token_attributes
from fuzzyrank.tagger.pos import pos_tag

LABELS = ("B-ASP", "I-ASP", "O")
VOCAB = ("the", "car", "handling", "very", "stable", "good", "is", "seats", "not", "brakes", "quickly", "sound")


def random_tokens(rng, length):
    return [VOCAB[i] for i in rng.integers(0, len(VOCAB), length)]


def random_model(rng, tokens, low=-1.0, high=1.0, integer=False):
    """Model whose attribute set covers ``tokens``, with random weights."""
    pos = pos_tag(tokens, CrfModel.zeros().pos_lexicon)
    attrs = sorted({a for feats in token_attributes(tokens, pos) for a in feats})
    model = CrfModel.zeros(attrs)
    if integer:
        w = rng.integers(int(low), int(high) + 1, model.n_weights).astype(float)
    else:
        w = rng.uniform(low, high, model.n_weights)
    model.set_weights(w)
    return model


def emission_table(model, tokens):
    """Per token and label, the sum of the weights of the attributes it fires."""
    pos = pos_tag(tokens, model.pos_lexicon)
    table = []
    for feats in token_attributes(tokens, pos, model.templates):
        row = []
        for y in range(3):
            row.append(math.fsum(model.emission[model.attributes[a], y] for a in feats if a in model.attributes))
        table.append(row)
    return table


def path_score(table, trans, labels):
    ys = [LABELS.index(lab) for lab in labels]
    total = math.fsum(table[t][y] for t, y in enumerate(ys))
    return total + math.fsum(trans[a, b] for a, b in zip(ys, ys[1:]))


def all_labelings(n):
    return itertools.product(LABELS, repeat=n)


def brute_log_partition(model, tokens):
    table = emission_table(model, tokens)
    scores = [path_score(table, model.transition, labs) for labs in all_labelings(len(tokens))]
    m = max(scores)
    return m + math.log(math.fsum(math.exp(s - m) for s in scores))


def brute_viterbi(model, tokens, tol=1e-12):
    """Best BIO-valid labeling; among ties, the smallest label-index tuple read right to left."""
    table = emission_table(model, tokens)
    cands = [(path_score(table, model.transition, labs), labs)
             for labs in all_labelings(len(tokens)) if is_valid_bio(labs)]
    best = max(s for s, _ in cands)
    tied = [labs for s, labs in cands if s >= best - tol]
    return min(tied, key=lambda labs: tuple(LABELS.index(x) for x in reversed(labs)))


def brute_marginals(model, tokens):
    table = emission_table(model, tokens)
    T = len(tokens)
    out = np.zeros((T, 3))
    log_z = brute_log_partition(model, tokens)
    for labs in all_labelings(T):
        p = math.exp(path_score(table, model.transition, labs) - log_z)
        for t, lab in enumerate(labs):
            out[t, LABELS.index(lab)] += p
    return out


def finite_difference_gradient(model, batch, h=1e-5, l2=0.0):
    from fuzzyrank.tagger.crf import crf_log_likelihood

    w0 = model.weights()
    grad = np.zeros_like(w0)
    probe = model.copy()
    for k in range(len(w0)):
        w = w0.copy()
        w[k] = w0[k] + h
        probe.set_weights(w)
        up = crf_log_likelihood(probe, batch, l2)
        w[k] = w0[k] - h
        probe.set_weights(w)
        down = crf_log_likelihood(probe, batch, l2)
        grad[k] = (up - down) / (2 * h)
    return grad


def random_labeled(rng, length):
    tokens = random_tokens(rng, length)
    while True:
        labs = tuple(LABELS[i] for i in rng.integers(0, 3, length))
        if is_valid_bio(labs):
            return LabeledSequence(tuple(tokens), labs)
