"""Argument/no-argument classifier over sentences and their evidence paths.

Two model variants share the code path:

* baseline   - a bidirectional LSTM over the frozen token embeddings alone.
* with paths - every evidence path is flattened to a vector by a shared
  bidirectional LSTM over trainable graph-element embeddings; per token, an
  attention mechanism (m_i = tanh(W_q q_i + W_v v), weights softmax(w_m^T m_i))
  pools the vectors of the paths anchored at that token into u, and [v; u]
  feeds the sentence encoder.  Tokens without paths contribute u = 0.

The final sentence-encoder hidden state goes through a two-unit softmax
layer.  Everything is hand-rolled numpy in double precision with explicit
backward passes, so analytic gradients can be validated against central
finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import SingleClassDatasetError
from .text import tokenize
from .vectors import EmbeddingTable

UNK = "<unk>"


class Label(str, Enum):
    NO_ARGUMENT = "NoArgument"
    ARGUMENT = "Argument"

    @classmethod
    def parse(cls, raw: str) -> "Label":
        """Pro/Con stance labels collapse to Argument."""
        if raw in ("Pro", "Con", "Argument"):
            return cls.ARGUMENT
        if raw == "NoArgument":
            return cls.NO_ARGUMENT
        raise ValueError(f"unknown label {raw!r}")

    @property
    def index(self) -> int:
        return 1 if self is Label.ARGUMENT else 0


class ClassifierMode(str, Enum):
    BASELINE = "baseline"
    WITH_PATHS = "with_paths"


@dataclass
class ClassifierHyperparams:
    dropout: float = 0.7
    hidden_size: int = 64
    batch_size: int = 16
    learning_rate: float = 0.001
    epochs: int = 10
    attention_size: int = 50
    max_paths: int = 10
    max_path_len: int = 15
    element_dim: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        for name in ("hidden_size", "batch_size", "attention_size", "max_paths", "max_path_len", "element_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class AnchoredPath:
    """Path element sequence plus the sentence token indices it attaches to."""

    elements: tuple[str, ...]
    anchors: tuple[int, ...]


@dataclass
class LabeledInstance:
    topic: str
    sentence: str
    label: Label
    paths: list[AnchoredPath] = field(default_factory=list)


def truncate_paths(paths: Sequence[AnchoredPath], max_paths: int, max_path_len: int) -> list[AnchoredPath]:
    """Cap the path count and per-path element count (kept odd to end on an entity)."""
    length = max_path_len if max_path_len % 2 == 1 else max_path_len - 1
    return [AnchoredPath(p.elements[:length], p.anchors) for p in paths[:max_paths]]


# ----------------------------------------------------------------------
# parameters


@dataclass
class ClassifierParams:
    mode: ClassifierMode
    hyper: ClassifierHyperparams
    element_vocab: dict[str, int]
    token_table: EmbeddingTable
    tensors: dict[str, np.ndarray]

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(
            mode=self.mode,
            hyper=self.hyper,
            element_vocab=dict(self.element_vocab),
            token_table=self.token_table,
            tensors={k: v.copy() for k, v in self.tensors.items()},
        )


def build_element_vocab(dataset: Sequence[LabeledInstance]) -> dict[str, int]:
    ids = sorted({el for inst in dataset for p in inst.paths for el in p.elements})
    return {UNK: 0, **{el: i + 1 for i, el in enumerate(ids)}}


def _glorot(rng, fan_in, fan_out, shape):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def init_params(
    hyper: ClassifierHyperparams,
    mode: ClassifierMode,
    element_vocab: dict[str, int],
    token_table: EmbeddingTable,
) -> ClassifierParams:
    rng = np.random.default_rng(hyper.seed)
    h = hyper.hidden_size
    d_tok = token_table.dimension
    d_el = hyper.element_dim
    a = hyper.attention_size
    sent_in = d_tok + (2 * h if mode is ClassifierMode.WITH_PATHS else 0)

    tensors: dict[str, np.ndarray] = {}
    tensors["elem_embed"] = rng.normal(0.0, 0.1, size=(len(element_vocab), d_el))
    for prefix, in_dim in (("path_fwd", d_el), ("path_bwd", d_el), ("sent_fwd", sent_in), ("sent_bwd", sent_in)):
        tensors[f"{prefix}_Wx"] = _glorot(rng, in_dim, 4 * h, (in_dim, 4 * h))
        tensors[f"{prefix}_Wh"] = _glorot(rng, h, 4 * h, (h, 4 * h))
        tensors[f"{prefix}_b"] = np.zeros(4 * h)
    tensors["att_Wq"] = _glorot(rng, 2 * h, a, (a, 2 * h))
    tensors["att_Wv"] = _glorot(rng, d_tok, a, (a, d_tok))
    tensors["att_wm"] = _glorot(rng, a, 1, (a,))
    tensors["out_W"] = _glorot(rng, 2 * h, 2, (2 * h, 2))
    tensors["out_b"] = np.zeros(2)
    tensors = {k: v.astype(np.float64) for k, v in tensors.items()}
    return ClassifierParams(mode=mode, hyper=hyper, element_vocab=element_vocab, token_table=token_table, tensors=tensors)


# ----------------------------------------------------------------------
# LSTM primitives (final-state read-out)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def lstm_forward(xs: np.ndarray, Wx, Wh, b):
    """Run an LSTM over (T, in_dim) inputs; return final hidden state + cache."""
    hdim = Wh.shape[0]
    h = np.zeros(hdim)
    c = np.zeros(hdim)
    cache = []
    for x in xs:
        a = x @ Wx + h @ Wh + b
        i = _sigmoid(a[:hdim])
        f = _sigmoid(a[hdim : 2 * hdim])
        o = _sigmoid(a[2 * hdim : 3 * hdim])
        g = np.tanh(a[3 * hdim :])
        c_new = f * c + i * g
        cache.append((x, h, c, i, f, o, g, c_new))
        h = o * np.tanh(c_new)
        c = c_new
    return h, cache


def lstm_backward(dh_final: np.ndarray, cache, Wx, Wh):
    """Backpropagate a gradient at the final hidden state through time."""
    hdim = Wh.shape[0]
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(4 * hdim)
    dxs = np.zeros((len(cache), Wx.shape[0]))
    dh = dh_final.copy()
    dc = np.zeros(hdim)
    for t in range(len(cache) - 1, -1, -1):
        x, h_prev, c_prev, i, f, o, g, c_new = cache[t]
        tanh_c = np.tanh(c_new)
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c**2)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc = dc * f
        da = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), do * o * (1 - o), dg * (1 - g**2)]
        )
        dWx += np.outer(x, da)
        dWh += np.outer(h_prev, da)
        db += da
        dxs[t] = Wx @ da
        dh = Wh @ da
    return dxs, dWx, dWh, db


def bilstm_forward(xs: np.ndarray, tensors, prefix: str):
    h_fwd, cache_fwd = lstm_forward(xs, tensors[f"{prefix}_fwd_Wx"], tensors[f"{prefix}_fwd_Wh"], tensors[f"{prefix}_fwd_b"])
    h_bwd, cache_bwd = lstm_forward(xs[::-1], tensors[f"{prefix}_bwd_Wx"], tensors[f"{prefix}_bwd_Wh"], tensors[f"{prefix}_bwd_b"])
    return np.concatenate([h_fwd, h_bwd]), (cache_fwd, cache_bwd)


def bilstm_backward(dout: np.ndarray, caches, tensors, grads, prefix: str):
    hdim = tensors[f"{prefix}_fwd_Wh"].shape[0]
    cache_fwd, cache_bwd = caches
    dxs_f, dWx_f, dWh_f, db_f = lstm_backward(dout[:hdim], cache_fwd, tensors[f"{prefix}_fwd_Wx"], tensors[f"{prefix}_fwd_Wh"])
    dxs_b, dWx_b, dWh_b, db_b = lstm_backward(dout[hdim:], cache_bwd, tensors[f"{prefix}_bwd_Wx"], tensors[f"{prefix}_bwd_Wh"])
    grads[f"{prefix}_fwd_Wx"] += dWx_f
    grads[f"{prefix}_fwd_Wh"] += dWh_f
    grads[f"{prefix}_fwd_b"] += db_f
    grads[f"{prefix}_bwd_Wx"] += dWx_b
    grads[f"{prefix}_bwd_Wh"] += dWh_b
    grads[f"{prefix}_bwd_b"] += db_b
    return dxs_f + dxs_b[::-1]


# ----------------------------------------------------------------------
# attention (per token over its anchored path vectors)


def attend(path_vectors: np.ndarray, token_vector: np.ndarray, params: ClassifierParams):
    """Pool path vectors for one token; returns (weights, context, cache)."""
    t = params.tensors
    Q = np.atleast_2d(path_vectors)
    pre = Q @ t["att_Wq"].T + token_vector @ t["att_Wv"].T  # (m, a)
    M = np.tanh(pre)
    scores = M @ t["att_wm"]
    scores = scores - scores.max()  # stable softmax
    e = np.exp(scores)
    alpha = e / e.sum()
    u = alpha @ Q
    return alpha, u, (Q, token_vector, M, alpha)


def _attend_backward(du, cache, tensors, grads):
    Q, v, M, alpha = cache
    dQ = alpha[:, None] * du[None, :]
    dalpha = Q @ du
    ds = alpha * (dalpha - float(alpha @ dalpha))
    dM = np.outer(ds, tensors["att_wm"])
    dpre = (1.0 - M**2) * dM
    grads["att_wm"] += M.T @ ds
    grads["att_Wq"] += dpre.T @ Q
    grads["att_Wv"] += np.outer(dpre.sum(axis=0), v)
    dQ += dpre @ tensors["att_Wq"]
    return dQ


# ----------------------------------------------------------------------
# full model


def _token_vectors(sentence: str, table: EmbeddingTable) -> tuple[list[str], np.ndarray]:
    tokens = tokenize(sentence)
    if not tokens:
        raise ValueError("sentence has no tokens")
    vecs = np.zeros((len(tokens), table.dimension))
    for idx, tok in enumerate(tokens):
        vec = table.get(tok)
        if vec is not None:
            vecs[idx] = vec
    return tokens, vecs


def encode_path(path: AnchoredPath, params: ClassifierParams):
    """Shared path encoder: embeds the elements, returns the BiLSTM read-out."""
    vocab = params.element_vocab
    indices = [vocab.get(el, vocab[UNK]) for el in path.elements]
    xs = params.tensors["elem_embed"][indices]
    q, cache = bilstm_forward(xs, params.tensors, "path")
    return q, (indices, cache)


def forward(
    instance: LabeledInstance,
    params: ClassifierParams,
    mode: Optional[ClassifierMode] = None,
    train: bool = False,
    rng: Optional[np.random.Generator] = None,
):
    """Class probabilities for one instance; caches everything for backward."""
    mode = mode or params.mode
    if mode is not params.mode:
        raise ValueError(f"params were initialized for {params.mode.value}, not {mode.value}")
    t = params.tensors
    hyper = params.hyper
    tokens, token_vecs = _token_vectors(instance.sentence, params.token_table)

    path_caches = []
    path_vectors = np.zeros((0, 0))
    drop_masks: dict[str, np.ndarray] = {}
    if mode is ClassifierMode.WITH_PATHS:
        paths = truncate_paths(instance.paths, hyper.max_paths, hyper.max_path_len)
        qs = []
        for path in paths:
            q, cache = encode_path(path, params)
            qs.append(q)
            path_caches.append(cache)
        h2 = 2 * hyper.hidden_size
        path_vectors = np.stack(qs) if qs else np.zeros((0, h2))
        if train and hyper.dropout > 0.0 and len(qs):
            keep = 1.0 - hyper.dropout
            drop_masks["paths"] = (rng.random(path_vectors.shape) < keep) / keep
            path_vectors = path_vectors * drop_masks["paths"]
        token_to_paths: dict[int, list[int]] = {}
        for j, path in enumerate(paths):
            for anchor in path.anchors:
                if 0 <= anchor < len(tokens):
                    token_to_paths.setdefault(anchor, []).append(j)
        att_caches: dict[int, tuple] = {}
        xs = np.zeros((len(tokens), token_vecs.shape[1] + h2))
        for i in range(len(tokens)):
            v = token_vecs[i]
            anchored = token_to_paths.get(i, [])
            if anchored:
                _, u, cache = attend(path_vectors[anchored], v, params)
                att_caches[i] = cache
            else:
                u = np.zeros(h2)
            xs[i] = np.concatenate([v, u])
    else:
        att_caches = {}
        token_to_paths = {}
        xs = token_vecs

    h_final, sent_cache = bilstm_forward(xs, t, "sent")
    if train and hyper.dropout > 0.0:
        keep = 1.0 - hyper.dropout
        drop_masks["final"] = (rng.random(h_final.shape) < keep) / keep
        h_final = h_final * drop_masks["final"]
    logits = h_final @ t["out_W"] + t["out_b"]
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    probs = exp / exp.sum()
    cache = {
        "mode": mode,
        "tokens": tokens,
        "token_vecs": token_vecs,
        "xs": xs,
        "h_final": h_final,
        "sent_cache": sent_cache,
        "probs": probs,
        "path_caches": path_caches,
        "path_vectors": path_vectors,
        "token_to_paths": token_to_paths,
        "att_caches": att_caches,
        "drop_masks": drop_masks,
    }
    return probs, cache


def instance_loss(probs: np.ndarray, label: Label) -> float:
    return float(-np.log(max(probs[label.index], 1e-300)))


def backward(instance: LabeledInstance, params: ClassifierParams, cache) -> dict[str, np.ndarray]:
    """Gradients of the cross-entropy loss for one instance."""
    t = params.tensors
    hyper = params.hyper
    grads = {k: np.zeros_like(v) for k, v in t.items()}

    dlogits = cache["probs"].copy()
    dlogits[instance.label.index] -= 1.0
    grads["out_W"] += np.outer(cache["h_final"], dlogits)
    grads["out_b"] += dlogits
    dh_final = t["out_W"] @ dlogits
    if "final" in cache["drop_masks"]:
        dh_final = dh_final * cache["drop_masks"]["final"]

    dxs = bilstm_backward(dh_final, cache["sent_cache"], t, grads, "sent")

    if cache["mode"] is ClassifierMode.WITH_PATHS:
        h2 = 2 * hyper.hidden_size
        d_tok = cache["token_vecs"].shape[1]
        n_paths = cache["path_vectors"].shape[0]
        dQ_total = np.zeros((n_paths, h2)) if n_paths else None
        for i, att_cache in cache["att_caches"].items():
            du = dxs[i][d_tok:]
            dQ_local = _attend_backward(du, att_cache, t, grads)
            for row, j in enumerate(cache["token_to_paths"][i]):
                dQ_total[j] += dQ_local[row]
        if n_paths:
            if "paths" in cache["drop_masks"]:
                dQ_total = dQ_total * cache["drop_masks"]["paths"]
            for j in range(n_paths):
                indices, path_cache = cache["path_caches"][j]
                dxs_path = bilstm_backward(dQ_total[j], path_cache, t, grads, "path")
                for row, idx in enumerate(indices):
                    grads["elem_embed"][idx] += dxs_path[row]
    return grads


# ----------------------------------------------------------------------
# training and evaluation


@dataclass
class TrainingLog:
    epoch_losses: list[float] = field(default_factory=list)


class AdamState:
    def __init__(self, tensors: dict[str, np.ndarray], lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.step_count = 0

    def step(self, tensors: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        self.step_count += 1
        b1, b2 = self.beta1, self.beta2
        correction1 = 1.0 - b1**self.step_count
        correction2 = 1.0 - b2**self.step_count
        for key, grad in grads.items():
            self.m[key] = b1 * self.m[key] + (1 - b1) * grad
            self.v[key] = b2 * self.v[key] + (1 - b2) * grad**2
            m_hat = self.m[key] / correction1
            v_hat = self.v[key] / correction2
            tensors[key] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train(
    dataset: Sequence[LabeledInstance],
    hyper: ClassifierHyperparams,
    mode: ClassifierMode,
    token_table: EmbeddingTable,
    params: Optional[ClassifierParams] = None,
) -> tuple[ClassifierParams, TrainingLog]:
    """Minibatch cross-entropy training with adaptive-moment updates."""
    if not dataset:
        raise SingleClassDatasetError("dataset is empty")
    labels = {inst.label for inst in dataset}
    if len(labels) < 2:
        raise SingleClassDatasetError("training needs both labels present")

    if params is None:
        vocab = build_element_vocab(dataset)
        params = init_params(hyper, mode, vocab, token_table)
    else:
        params = params.copy()
    rng = np.random.default_rng(hyper.seed + 1)
    adam = AdamState(params.tensors, hyper.learning_rate)
    log = TrainingLog()

    for _epoch in range(hyper.epochs):
        order = rng.permutation(len(dataset))
        losses = []
        for start in range(0, len(order), hyper.batch_size):
            batch = [dataset[i] for i in order[start : start + hyper.batch_size]]
            grads = {k: np.zeros_like(v) for k, v in params.tensors.items()}
            for inst in batch:
                probs, cache = forward(inst, params, train=True, rng=rng)
                losses.append(instance_loss(probs, inst.label))
                for key, grad in backward(inst, params, cache).items():
                    grads[key] += grad
            for key in grads:
                grads[key] /= len(batch)
            adam.step(params.tensors, grads)
        log.epoch_losses.append(float(np.mean(losses)))
    return params, log


@dataclass
class EvalResult:
    accuracy: float
    macro_f1: float
    positive_f1: float
    confusion: np.ndarray  # rows: true label, cols: predicted; order [NoArgument, Argument]


def evaluate(params: ClassifierParams, dataset: Sequence[LabeledInstance], mode: Optional[ClassifierMode] = None) -> EvalResult:
    """Accuracy, macro and positive-class F1, and the 2x2 confusion matrix."""
    if not dataset:
        raise ValueError("evaluation dataset is empty")
    confusion = np.zeros((2, 2), dtype=np.int64)
    for inst in dataset:
        probs, _ = forward(inst, params, mode=mode)
        confusion[inst.label.index, int(np.argmax(probs))] += 1
    return EvalResult(
        accuracy=float(np.trace(confusion) / confusion.sum()),
        macro_f1=float(np.mean([_f1(confusion, c) for c in (0, 1)])),
        positive_f1=_f1(confusion, 1),
        confusion=confusion,
    )


def _f1(confusion: np.ndarray, cls: int) -> float:
    tp = confusion[cls, cls]
    fp = confusion[1 - cls, cls]
    fn = confusion[cls, 1 - cls]
    denom = 2 * tp + fp + fn
    return float(2 * tp / denom) if denom else 0.0


# ----------------------------------------------------------------------
# checkpointing

CHECKPOINT_VERSION = 1


def save_checkpoint(params: ClassifierParams, path: str | Path) -> None:
    meta = {
        "version": CHECKPOINT_VERSION,
        "mode": params.mode.value,
        "hyper": params.hyper.__dict__,
        "element_vocab": params.element_vocab,
        "shapes": {k: list(v.shape) for k, v in params.tensors.items()},
    }
    np.savez(path, __meta__=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **params.tensors)


def load_checkpoint(path: str | Path, token_table: EmbeddingTable) -> ClassifierParams:
    data = np.load(path)
    meta = json.loads(bytes(data["__meta__"]).decode("utf-8"))
    if meta["version"] != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {meta['version']}")
    tensors = {k: data[k] for k in meta["shapes"]}
    for k, shape in meta["shapes"].items():
        if list(tensors[k].shape) != shape:
            raise ValueError(f"tensor {k} has shape {tensors[k].shape}, expected {shape}")
    return ClassifierParams(
        mode=ClassifierMode(meta["mode"]),
        hyper=ClassifierHyperparams(**meta["hyper"]),
        element_vocab=meta["element_vocab"],
        token_table=token_table,
        tensors=tensors,
    )
