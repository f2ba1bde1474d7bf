"""Linear-chain inference kernels.

Every kernel exists twice: a numba version (suffix ``_nb``) with explicit
loops, and a vectorised numpy version (suffix ``_np``). The un-suffixed names
are bound to one of them according to :data:`fuzzyrank._accel.USE_NUMBA`.

Shapes: ``emissions`` is ``(T, L)``, ``transitions`` is ``(L, L)`` indexed
``[prev, cur]``. All scores are in log space.
"""

import numpy as np

from .._accel import USE_NUMBA, njit


# --------------------------------------------------------------------------
# numba kernels


@njit
def emission_scores_nb(weights, attr_ids, offsets):
    n_tokens = offsets.shape[0] - 1
    n_labels = weights.shape[1]
    out = np.zeros((n_tokens, n_labels))
    for t in range(n_tokens):
        for k in range(offsets[t], offsets[t + 1]):
            a = attr_ids[k]
            for y in range(n_labels):
                out[t, y] += weights[a, y]
    return out


@njit
def forward_nb(emissions, transitions):
    T, L = emissions.shape
    alpha = np.empty((T, L))
    for y in range(L):
        alpha[0, y] = emissions[0, y]
    buf = np.empty(L)
    for t in range(1, T):
        for j in range(L):
            m = -np.inf
            for i in range(L):
                buf[i] = alpha[t - 1, i] + transitions[i, j]
                if buf[i] > m:
                    m = buf[i]
            s = 0.0
            for i in range(L):
                s += np.exp(buf[i] - m)
            alpha[t, j] = m + np.log(s) + emissions[t, j]
    m = -np.inf
    for y in range(L):
        if alpha[T - 1, y] > m:
            m = alpha[T - 1, y]
    s = 0.0
    for y in range(L):
        s += np.exp(alpha[T - 1, y] - m)
    return alpha, m + np.log(s)


@njit
def backward_nb(emissions, transitions):
    T, L = emissions.shape
    beta = np.zeros((T, L))
    buf = np.empty(L)
    for t in range(T - 2, -1, -1):
        for i in range(L):
            m = -np.inf
            for j in range(L):
                buf[j] = transitions[i, j] + emissions[t + 1, j] + beta[t + 1, j]
                if buf[j] > m:
                    m = buf[j]
            s = 0.0
            for j in range(L):
                s += np.exp(buf[j] - m)
            beta[t, i] = m + np.log(s)
    return beta


@njit
def marginals_nb(emissions, transitions, alpha, beta, log_z):
    """Unary marginals ``(T, L)`` and pairwise marginals summed over time ``(L, L)``."""
    T, L = emissions.shape
    unary = np.empty((T, L))
    for t in range(T):
        for y in range(L):
            unary[t, y] = np.exp(alpha[t, y] + beta[t, y] - log_z)
    pair = np.zeros((L, L))
    for t in range(1, T):
        for i in range(L):
            for j in range(L):
                pair[i, j] += np.exp(
                    alpha[t - 1, i] + transitions[i, j] + emissions[t, j] + beta[t, j] - log_z
                )
    return unary, pair


@njit
def viterbi_nb(emissions, transitions, start_penalty, transition_penalty):
    T, L = emissions.shape
    delta = np.empty((T, L))
    back = np.zeros((T, L), dtype=np.int64)
    for y in range(L):
        delta[0, y] = emissions[0, y] + start_penalty[y]
    for t in range(1, T):
        for j in range(L):
            best = -np.inf
            arg = 0
            for i in range(L):
                s = delta[t - 1, i] + transitions[i, j] + transition_penalty[i, j]
                # strict '>' keeps the lowest label index on ties
                if s > best:
                    best = s
                    arg = i
            delta[t, j] = best + emissions[t, j]
            back[t, j] = arg
    path = np.empty(T, dtype=np.int64)
    best = -np.inf
    arg = 0
    for y in range(L):
        if delta[T - 1, y] > best:
            best = delta[T - 1, y]
            arg = y
    path[T - 1] = arg
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, best


# --------------------------------------------------------------------------
# numpy kernels


def _logsumexp_cols(m):
    top = m.max(axis=0)
    return top + np.log(np.exp(m - top).sum(axis=0))


def emission_scores_np(weights, attr_ids, offsets):
    n_tokens = offsets.shape[0] - 1
    out = np.zeros((n_tokens, weights.shape[1]))
    token_of = np.repeat(np.arange(n_tokens), np.diff(offsets))
    np.add.at(out, token_of, weights[attr_ids])
    return out


def forward_np(emissions, transitions):
    T = emissions.shape[0]
    alpha = np.empty_like(emissions, dtype=float)
    alpha[0] = emissions[0]
    for t in range(1, T):
        alpha[t] = _logsumexp_cols(alpha[t - 1][:, None] + transitions) + emissions[t]
    return alpha, float(_logsumexp_cols(alpha[T - 1][:, None])[0])


def backward_np(emissions, transitions):
    T = emissions.shape[0]
    beta = np.zeros_like(emissions, dtype=float)
    for t in range(T - 2, -1, -1):
        beta[t] = _logsumexp_cols((transitions + emissions[t + 1] + beta[t + 1]).T)
    return beta


def marginals_np(emissions, transitions, alpha, beta, log_z):
    unary = np.exp(alpha + beta - log_z)
    if emissions.shape[0] < 2:
        return unary, np.zeros_like(transitions, dtype=float)
    pair = np.exp(
        alpha[:-1, :, None] + transitions[None] + (emissions[1:] + beta[1:])[:, None, :] - log_z
    )
    return unary, pair.sum(axis=0)


def viterbi_np(emissions, transitions, start_penalty, transition_penalty):
    T, L = emissions.shape
    delta = np.empty((T, L))
    back = np.zeros((T, L), dtype=np.int64)
    delta[0] = emissions[0] + start_penalty
    for t in range(1, T):
        cand = delta[t - 1][:, None] + transitions + transition_penalty
        back[t] = cand.argmax(axis=0)  # first maximum on ties
        delta[t] = cand[back[t], np.arange(L)] + emissions[t]
    path = np.empty(T, dtype=np.int64)
    path[T - 1] = int(delta[T - 1].argmax())
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, float(delta[T - 1, path[T - 1]])


if USE_NUMBA:
    emission_scores = emission_scores_nb
    forward = forward_nb
    backward = backward_nb
    marginals = marginals_nb
    viterbi = viterbi_nb
else:
    emission_scores = emission_scores_np
    forward = forward_np
    backward = backward_np
    marginals = marginals_np
    viterbi = viterbi_np
