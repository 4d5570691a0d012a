"""Convolutional semantic similarity over letter-trigram word hashing.

Words are wrapped as #word# and decomposed into letter trigrams, hashed
into a fixed number of buckets.  A sliding window over the token sequence
concatenates the per-word bucket counts, a convolution layer maps each
window to a local feature vector, max pooling collapses the windows, and
a final projection yields the semantic vector.  Query-document similarity
is the cosine of the two semantic vectors.

Training minimizes the negative log-likelihood of the clicked document
under a sharpened softmax over cosine similarities against in-batch
negatives.  Gradients are computed analytically; a finite-difference
checker validates them entry by entry.
"""

import json
import zlib
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CdssmParams", "init_params", "cdssm_forward", "cdssm_similarity",
    "cdssm_train", "cdssm_grad_check", "cdssm_loss", "letter_trigrams",
    "diagnostics", "reset_diagnostics",
]

DEFAULT_D_L = 5000
DEFAULT_WINDOW = 3
DEFAULT_D_CONV = 64
DEFAULT_D_SEM = 32
DEFAULT_GAMMA = 10.0
DEFAULT_NEGATIVES = 4

# incremented when a zero-norm semantic vector forces similarity to 0
diagnostics = {"zero_norm_vectors": 0}


def reset_diagnostics():
    diagnostics["zero_norm_vectors"] = 0


def letter_trigrams(word):
    """Letter trigrams of '#word#'; short words still yield at least one."""
    wrapped = "#" + word + "#"
    return [wrapped[i:i + 3] for i in range(max(1, len(wrapped) - 2))]


@lru_cache(maxsize=65536)
def _word_buckets(word, d_l):
    """Hashed trigram counts of a word as ((bucket, count), ...)."""
    counts = Counter(zlib.crc32(t.encode("utf-8")) % d_l for t in letter_trigrams(word))
    return tuple(sorted(counts.items()))


@dataclass
class CdssmParams:
    """Model weights plus the structural hyperparameters they depend on."""

    d_l: int
    window: int
    w_c: np.ndarray  # d_conv x (window * d_l)
    w_s: np.ndarray  # d_sem x d_conv

    @property
    def d_conv(self):
        return self.w_c.shape[0]

    @property
    def d_sem(self):
        return self.w_s.shape[0]

    def copy(self):
        return CdssmParams(self.d_l, self.window, self.w_c.copy(), self.w_s.copy())

    def to_dict(self):
        return {
            "d_l": self.d_l,
            "window": self.window,
            "d_conv": int(self.d_conv),
            "d_sem": int(self.d_sem),
            "w_c": [float(x) for x in self.w_c.ravel()],
            "w_s": [float(x) for x in self.w_s.ravel()],
        }

    @classmethod
    def from_dict(cls, data):
        d_l = int(data["d_l"])
        window = int(data["window"])
        d_conv = int(data["d_conv"])
        d_sem = int(data["d_sem"])
        w_c = np.array(data["w_c"], dtype=float).reshape(d_conv, window * d_l)
        w_s = np.array(data["w_s"], dtype=float).reshape(d_sem, d_conv)
        return cls(d_l=d_l, window=window, w_c=w_c, w_s=w_s)


def init_params(d_l=DEFAULT_D_L, window=DEFAULT_WINDOW, d_conv=DEFAULT_D_CONV,
                d_sem=DEFAULT_D_SEM, seed=0) -> CdssmParams:
    """Seeded uniform(-r, r) initialization, r = sqrt(6 / (fan_in + fan_out))."""
    rng = np.random.default_rng(seed)
    r_c = np.sqrt(6.0 / (window * d_l + d_conv))
    w_c = rng.uniform(-r_c, r_c, size=(d_conv, window * d_l))
    r_s = np.sqrt(6.0 / (d_conv + d_sem))
    w_s = rng.uniform(-r_s, r_s, size=(d_sem, d_conv))
    return CdssmParams(d_l=d_l, window=window, w_c=w_c, w_s=w_s)


class _Seq:
    """Precomputed window layout of a token sequence.

    Hash buckets depend only on the tokens, so a sequence can be laid out
    once and evaluated under many parameter settings.
    """

    __slots__ = ("windows",)

    def __init__(self, tokens, d_l, window):
        half = window // 2
        windows = []
        if not tokens:
            windows.append((np.empty(0, dtype=np.intp), np.empty(0)))
        for i in range(len(tokens)):
            idx, cnt = [], []
            for s in range(window):
                j = i - half + s
                if 0 <= j < len(tokens):
                    base = s * d_l
                    for bucket, count in _word_buckets(tokens[j], d_l):
                        idx.append(base + bucket)
                        cnt.append(float(count))
            windows.append((np.array(idx, dtype=np.intp), np.array(cnt)))
        self.windows = windows


def _forward_seq(seq: _Seq, params: CdssmParams):
    """Forward pass keeping the intermediates backprop needs."""
    n = len(seq.windows)
    h = np.empty((n, params.d_conv))
    for t, (idx, cnt) in enumerate(seq.windows):
        z = params.w_c[:, idx] @ cnt if idx.size else np.zeros(params.d_conv)
        h[t] = np.tanh(z)
    amax = np.argmax(h, axis=0)
    v = h[amax, np.arange(params.d_conv)]
    y = np.tanh(params.w_s @ v)
    return h, amax, v, y


def cdssm_forward(tokens, params: CdssmParams):
    """Semantic vector of a token sequence; empty input uses one
    all-padding window (so y = tanh(W_s . tanh(0)) = 0)."""
    seq = _Seq(list(tokens), params.d_l, params.window)
    return _forward_seq(seq, params)[3]


def _cosine(a, b):
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return None
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def cdssm_similarity(q_tokens, d_tokens, params: CdssmParams):
    """Cosine of the two semantic vectors, in [-1, 1].

    A zero-norm vector (degenerate weights) yields 0 and bumps the
    module diagnostics counter rather than raising.
    """
    cos = _cosine(cdssm_forward(q_tokens, params), cdssm_forward(d_tokens, params))
    if cos is None:
        diagnostics["zero_norm_vectors"] += 1
        return 0.0
    return cos


def _softmax(scores):
    shifted = scores - np.max(scores)
    e = np.exp(shifted)
    return e / e.sum()


def _sample_loss_grad(params, q_seq, doc_seqs, gamma, want_grad):
    """Loss (and optionally gradients) of one training sample.

    doc_seqs[0] is the clicked document; the rest are negatives.  The loss
    is -log softmax_0 over gamma-scaled cosine similarities.
    """
    q_h, q_amax, q_v, q_y = _forward_seq(q_seq, params)
    traces = [_forward_seq(d, params) for d in doc_seqs]

    n_q = np.linalg.norm(q_y)
    cos = np.empty(len(doc_seqs))
    norms = np.empty(len(doc_seqs))
    for j, (_, _, _, d_y) in enumerate(traces):
        norms[j] = np.linalg.norm(d_y)
        if n_q == 0.0 or norms[j] == 0.0:
            cos[j] = 0.0
        else:
            cos[j] = q_y @ traces[j][3] / (n_q * norms[j])

    p = _softmax(gamma * cos)
    loss = -np.log(max(p[0], 1e-300))
    if not want_grad:
        return loss, None, None

    g_wc = np.zeros_like(params.w_c)
    g_ws = np.zeros_like(params.w_s)
    g_qy = np.zeros_like(q_y)
    d_cos = gamma * p
    d_cos[0] -= gamma  # dL/dcos_j = gamma * (p_j - [j == 0])

    def backprop(seq, trace, g_y):
        h, amax, v, y = trace
        g_u = g_y * (1.0 - y * y)
        g_ws_local = np.outer(g_u, v)
        g_v = params.w_s.T @ g_u
        # max pooling routes each dimension's gradient to its argmax window
        g_h = np.zeros_like(h)
        g_h[amax, np.arange(h.shape[1])] = g_v
        touched = np.nonzero(np.any(g_h != 0.0, axis=1))[0]
        for t in touched:
            g_z = g_h[t] * (1.0 - h[t] * h[t])
            idx, cnt = seq.windows[t]
            if idx.size:
                # indices within a window are unique, so += accumulates safely
                g_wc[:, idx] += np.outer(g_z, cnt)
        return g_ws_local

    for j, trace in enumerate(traces):
        if d_cos[j] == 0.0 or n_q == 0.0 or norms[j] == 0.0:
            continue
        d_y = trace[3]
        inv = 1.0 / (n_q * norms[j])
        g_qy += d_cos[j] * (d_y * inv - cos[j] * q_y / (n_q * n_q))
        g_dy = d_cos[j] * (q_y * inv - cos[j] * d_y / (norms[j] * norms[j]))
        g_ws += backprop(doc_seqs[j], trace, g_dy)

    g_ws += backprop(q_seq, (q_h, q_amax, q_v, q_y), g_qy)
    return loss, g_wc, g_ws


def cdssm_loss(params, q_tokens, docs, gamma=DEFAULT_GAMMA):
    """Softmax loss of one sample; docs[0] is the clicked document."""
    q_seq = _Seq(list(q_tokens), params.d_l, params.window)
    doc_seqs = [_Seq(list(d), params.d_l, params.window) for d in docs]
    return _sample_loss_grad(params, q_seq, doc_seqs, gamma, want_grad=False)[0]


def cdssm_train(pairs, d_l=DEFAULT_D_L, window=DEFAULT_WINDOW, d_conv=DEFAULT_D_CONV,
                d_sem=DEFAULT_D_SEM, negatives=DEFAULT_NEGATIVES, gamma=DEFAULT_GAMMA,
                learning_rate=0.05, epochs=5, seed=0, init=None) -> CdssmParams:
    """SGD training on (query tokens, clicked doc tokens) pairs.

    Negatives for each pair are drawn from the other pairs' documents, so
    the pool must be larger than the negative count.  Deterministic for a
    fixed seed; ``init`` continues training from existing parameters.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("cdssm_train requires at least one pair")
    if negatives >= len(pairs):
        raise ValueError(
            f"negatives per pair ({negatives}) must be smaller than the pair count ({len(pairs)})")

    params = init.copy() if init is not None else init_params(d_l, window, d_conv, d_sem, seed)
    q_seqs = [_Seq(list(q), params.d_l, params.window) for q, _ in pairs]
    d_seqs = [_Seq(list(d), params.d_l, params.window) for _, d in pairs]

    rng = np.random.default_rng(seed)
    indices = np.arange(len(pairs))
    for _ in range(epochs):
        order = rng.permutation(len(pairs))
        for i in order:
            pool = indices[indices != i]
            neg = rng.choice(pool, size=negatives, replace=False)
            doc_seqs = [d_seqs[i]] + [d_seqs[j] for j in neg]
            _, g_wc, g_ws = _sample_loss_grad(params, q_seqs[i], doc_seqs, gamma, True)
            params.w_c -= learning_rate * g_wc
            params.w_s -= learning_rate * g_ws
    return params


def cdssm_grad_check(params, pair, J, gamma=DEFAULT_GAMMA, negatives=None,
                     seed=0, step=1e-4):
    """Max relative error between analytic and central-difference gradients.

    Checks every entry of W_c and W_s for the loss of one sample built
    from ``pair`` (query, clicked doc) and J negative documents.  When no
    negatives are supplied, J pseudo-random ones are generated from the
    seed.  J must be at least 1: with no negatives the softmax is
    degenerate and the loss is identically zero.
    """
    if J < 1:
        raise ValueError("grad check requires at least one negative document")
    q_tokens, d_tokens = pair
    if negatives is None:
        rng = np.random.default_rng(seed)
        letters = "abcdefghijklmnopqrstuvwxyz"
        negatives = [
            ["".join(rng.choice(list(letters), size=rng.integers(3, 7)))
             for _ in range(3)]
            for _ in range(J)
        ]
    if len(negatives) != J:
        raise ValueError("negatives list length must equal J")

    work = params.copy()
    q_seq = _Seq(list(q_tokens), work.d_l, work.window)
    doc_seqs = [_Seq(list(d), work.d_l, work.window)
                for d in [list(d_tokens)] + [list(n) for n in negatives]]

    _, g_wc, g_ws = _sample_loss_grad(work, q_seq, doc_seqs, gamma, True)

    def loss():
        return _sample_loss_grad(work, q_seq, doc_seqs, gamma, False)[0]

    max_err = 0.0
    for matrix, grad in ((work.w_c, g_wc), (work.w_s, g_ws)):
        flat = matrix.ravel()
        g_flat = grad.ravel()
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            up = loss()
            flat[k] = orig - step
            down = loss()
            flat[k] = orig
            numeric = (up - down) / (2.0 * step)
            denom = max(abs(g_flat[k]) + abs(numeric), 1e-3)
            max_err = max(max_err, abs(g_flat[k] - numeric) / denom)
    return max_err


def params_to_json(params: CdssmParams) -> str:
    return json.dumps({"format_version": 1, **params.to_dict()}, sort_keys=True)


def params_from_json(text: str) -> CdssmParams:
    return CdssmParams.from_dict(json.loads(text))
