"""Trainable sigmoid classification head over fixed embeddings.

A single linear layer with one sigmoid output, trained with
class-weighted binary cross entropy and Adam on seeded mini-batches.
Early stopping watches the validation loss; the returned parameters are
the snapshot from the best-validation-loss epoch. Restart selection and
two-stage cross-institution transfer reproduce the fine-tuning recipe at
the head level: train on the large source corpus first, then continue on
the small target corpus at a lower learning rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, TextIO

import numpy as np

from .corpus import Severity
from .errors import DataError

DEFAULT_SOURCE_LR = 1e-6
DEFAULT_TARGET_LR = 1e-8
PROB_CLAMP = 1e-12

LabeledEmbedding = tuple[np.ndarray, Severity]


@dataclass(frozen=True)
class HeadModel:
    weights: np.ndarray
    bias: float
    provenance: str = ""
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.weights).all() and math.isfinite(self.bias)):
            raise DataError("head parameters must be finite")

    @property
    def dim(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = DEFAULT_SOURCE_LR
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    restarts: int = 5
    seed: int = 0

    def validate(self) -> None:
        if self.learning_rate < 0:
            raise DataError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise DataError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.restarts < 1:
            raise DataError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_epochs < 1:
            raise DataError(f"max_epochs must be >= 1, got {self.max_epochs}")


@dataclass
class AdamState:
    """First/second moment accumulators with the usual constants."""
    m_w: np.ndarray
    v_w: np.ndarray
    m_b: float = 0.0
    v_b: float = 0.0
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, dim: int) -> "AdamState":
        return cls(m_w=np.zeros(dim), v_w=np.zeros(dim))


@dataclass(frozen=True)
class TrainLog:
    train_loss: list[float]
    val_loss: list[float]
    val_f1: list[float]
    selected_epoch: int
    restart_index: int = 0

    def epochs_run(self) -> int:
        return len(self.train_loss)


def class_weights(labels: Sequence[Severity]) -> dict[Severity, float]:
    """Inverse-frequency weights w_c = N / (2 * N_c) over a train split."""
    n = len(labels)
    n_high = sum(1 for y in labels if y == Severity.HIGH)
    n_low = n - n_high
    if n_high == 0 or n_low == 0:
        raise DataError("class weights need both classes present")
    return {Severity.HIGH: n / (2.0 * n_high), Severity.LOW: n / (2.0 * n_low)}


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def head_forward(m: HeadModel, x: np.ndarray) -> float:
    """sigmoid(w . x + b), strictly inside (0, 1)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (m.dim,):
        raise DataError(f"dimension mismatch: model {m.dim}, input {x.shape}")
    p = float(_sigmoid(np.array([m.weights @ x + m.bias]))[0])
    return min(max(p, PROB_CLAMP), 1.0 - PROB_CLAMP)


def _forward_batch(m: HeadModel, X: np.ndarray) -> np.ndarray:
    p = _sigmoid(X @ m.weights + m.bias)
    return np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)


def _batch_arrays(batch: Sequence[LabeledEmbedding]) -> tuple[np.ndarray, np.ndarray]:
    X = np.stack([np.asarray(x, dtype=float) for x, _ in batch])
    y = np.array([1.0 if label == Severity.HIGH else 0.0 for _, label in batch])
    return X, y


def _weight_vector(y: np.ndarray, weights: dict[Severity, float]) -> np.ndarray:
    return np.where(y > 0.5, weights[Severity.HIGH], weights[Severity.LOW])


def weighted_bce_loss(m: HeadModel, batch: Sequence[LabeledEmbedding],
                      weights: dict[Severity, float]) -> float:
    """Mean class-weighted binary cross entropy; probabilities are clamped
    to [1e-12, 1-1e-12] before the logs."""
    if not batch:
        raise DataError("empty batch")
    if any(w <= 0 for w in weights.values()):
        raise DataError("class weights must be positive")
    X, y = _batch_arrays(batch)
    p = _forward_batch(m, X)
    w = _weight_vector(y, weights)
    return float(np.mean(-w * (y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def bce_gradient(m: HeadModel, batch: Sequence[LabeledEmbedding],
                 weights: dict[Severity, float]) -> tuple[np.ndarray, float]:
    """Analytic gradient of the weighted BCE: mean of w_y (p - y) x, and
    w_y (p - y) for the bias."""
    if not batch:
        raise DataError("empty batch")
    X, y = _batch_arrays(batch)
    p = _forward_batch(m, X)
    w = _weight_vector(y, weights)
    r = w * (p - y)
    return (X.T @ r) / len(batch), float(np.mean(r))


def adam_step(state: AdamState, m: HeadModel, grad: tuple[np.ndarray, float],
              lr: float) -> tuple[AdamState, HeadModel]:
    """One bias-corrected Adam update; returns fresh state and model."""
    g_w, g_b = grad
    if g_w.shape != m.weights.shape:
        raise DataError("gradient shape does not match model")
    t = state.step + 1
    m_w = state.beta1 * state.m_w + (1 - state.beta1) * g_w
    v_w = state.beta2 * state.v_w + (1 - state.beta2) * g_w * g_w
    m_b = state.beta1 * state.m_b + (1 - state.beta1) * g_b
    v_b = state.beta2 * state.v_b + (1 - state.beta2) * g_b * g_b
    c1 = 1 - state.beta1 ** t
    c2 = 1 - state.beta2 ** t
    new_w = m.weights - lr * (m_w / c1) / (np.sqrt(v_w / c2) + state.eps)
    new_b = m.bias - lr * (m_b / c1) / (math.sqrt(v_b / c2) + state.eps)
    new_state = AdamState(m_w=m_w, v_w=v_w, m_b=m_b, v_b=v_b, step=t,
                          beta1=state.beta1, beta2=state.beta2, eps=state.eps)
    return new_state, HeadModel(new_w, float(new_b), m.provenance, m.seed)


def _val_f1(m: HeadModel, val_X: np.ndarray, val_y: np.ndarray) -> float:
    pred = _forward_batch(m, val_X) > 0.5
    tp = float(np.sum(pred & (val_y > 0.5)))
    fp = float(np.sum(pred & (val_y <= 0.5)))
    fn = float(np.sum(~pred & (val_y > 0.5)))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def init_head(dim: int, seed: int) -> HeadModel:
    """Seeded uniform init on [-1/sqrt(dim), 1/sqrt(dim)], zero bias."""
    rng = np.random.default_rng(seed)
    scale = 1.0 / math.sqrt(dim)
    return HeadModel(rng.uniform(-scale, scale, size=dim), 0.0, seed=seed)


def train_head(train: Sequence[LabeledEmbedding], val: Sequence[LabeledEmbedding],
               cfg: TrainConfig, init: Optional[HeadModel] = None,
               restart_index: int = 0) -> tuple[HeadModel, TrainLog]:
    """Mini-batch Adam with early stopping on validation loss.

    Batches come from a seeded shuffle each epoch. Training stops when the
    validation loss has not improved for cfg.patience consecutive epochs
    (or at cfg.max_epochs) and the best-validation-loss snapshot is
    returned. Class weights are computed from this train split.
    """
    cfg.validate()
    if not train:
        raise DataError("empty training set")
    if not val:
        raise DataError("empty validation set")
    weights = class_weights([label for _, label in train])
    X, y = _batch_arrays(train)
    val_X, val_y = _batch_arrays(val)
    dim = X.shape[1]
    if val_X.shape[1] != dim:
        raise DataError(f"train/val dimension mismatch: {dim} vs {val_X.shape[1]}")
    if init is None:
        model = init_head(dim, cfg.seed)
    else:
        if init.dim != dim:
            raise DataError(f"init dimension mismatch: {init.dim} vs {dim}")
        model = HeadModel(init.weights.copy(), init.bias, init.provenance, cfg.seed)
    labels = [label for _, label in train]
    state = AdamState.zeros(dim)
    rng = np.random.default_rng(cfg.seed)
    train_losses: list[float] = []
    val_losses: list[float] = []
    val_f1s: list[float] = []
    best_model = model
    best_loss = math.inf
    best_epoch = 0
    stall = 0
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(len(train))
        for start in range(0, len(train), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            batch = [(X[i], labels[i]) for i in idx]
            grad = bce_gradient(model, batch, weights)
            state, model = adam_step(state, model, grad, cfg.learning_rate)
        train_losses.append(weighted_bce_loss(model, list(zip(X, labels)), weights))
        vl = weighted_bce_loss(model, list(zip(val_X, [lab for _, lab in val])), weights)
        val_losses.append(vl)
        val_f1s.append(_val_f1(model, val_X, val_y))
        if vl < best_loss - 1e-15:
            best_loss, best_model, best_epoch = vl, model, epoch
            stall = 0
        else:
            stall += 1
            if stall >= cfg.patience:
                break
    log = TrainLog(train_loss=train_losses, val_loss=val_losses, val_f1=val_f1s,
                   selected_epoch=best_epoch, restart_index=restart_index)
    return best_model, log


def train_head_restarts(train: Sequence[LabeledEmbedding],
                        val: Sequence[LabeledEmbedding], cfg: TrainConfig,
                        init: Optional[HeadModel] = None,
                        ) -> tuple[HeadModel, list[TrainLog]]:
    """Run cfg.restarts independently seeded trainings and keep the model
    with the best validation F1."""
    results = []
    for r in range(cfg.restarts):
        run_cfg = replace(cfg, seed=cfg.seed + r)
        results.append(train_head(train, val, run_cfg, init=init, restart_index=r))
    best = select_best_restart(results, val)
    return best, [log for _, log in results]


def select_best_restart(results: Sequence[tuple[HeadModel, TrainLog]],
                        val: Sequence[LabeledEmbedding]) -> HeadModel:
    """Pick the restart whose model has the best validation positive-class
    F1; ties go to the lowest restart index."""
    if not results:
        raise DataError("no restart results to select from")
    val_X, val_y = _batch_arrays(val)
    best_model, best_key = None, None
    for model, log in results:
        key = (-_val_f1(model, val_X, val_y), log.restart_index)
        if best_key is None or key < best_key:
            best_model, best_key = model, key
    return best_model


def transfer_train(source_train: Sequence[LabeledEmbedding],
                   source_val: Sequence[LabeledEmbedding],
                   target_train: Sequence[LabeledEmbedding],
                   target_val: Sequence[LabeledEmbedding],
                   cfg_source: TrainConfig, cfg_target: TrainConfig,
                   ) -> tuple[HeadModel, list[TrainLog]]:
    """Two-stage transfer: train on the source institution, then continue
    on the target initialized from the stage-1 model. Class weights are
    recomputed from each stage's own train split."""
    try:
        stage1, log1 = train_head(source_train, source_val, cfg_source)
    except DataError as exc:
        raise DataError(f"source stage: {exc}") from exc
    try:
        stage2, log2 = train_head(target_train, target_val, cfg_target, init=stage1)
    except DataError as exc:
        raise DataError(f"target stage: {exc}") from exc
    return stage2, [log1, log2]


def head_scores(m: HeadModel, X: np.ndarray) -> np.ndarray:
    """Predicted HIGH probabilities for a stacked embedding matrix."""
    if X.shape[1] != m.dim:
        raise DataError(f"dimension mismatch: model {m.dim}, input {X.shape[1]}")
    return _forward_batch(m, X)


# --- persistence -----------------------------------------------------------

def write_head(m: HeadModel, fh: TextIO) -> None:
    fh.write("headv1\n")
    fh.write(f"dim {m.dim}\n")
    fh.write(f"seed {m.seed}\n")
    fh.write(f"provenance {m.provenance}\n")
    fh.write(f"bias {m.bias:.17g}\n")
    fh.write("weights " + " ".join(f"{w:.17g}" for w in m.weights) + "\n")


def read_head(fh: TextIO) -> HeadModel:
    def next_line():
        line = fh.readline()
        if not line:
            raise DataError("truncated head model file")
        return line.rstrip("\n")

    def field_of(line: str, key: str) -> str:
        head, _, rest = line.partition(" ")
        if head != key:
            raise DataError(f"head model: expected '{key} ...', got {line!r}")
        return rest

    if next_line() != "headv1":
        raise DataError("not a head model file (bad magic)")
    dim = int(field_of(next_line(), "dim"))
    seed = int(field_of(next_line(), "seed"))
    provenance = field_of(next_line(), "provenance")
    bias = float(field_of(next_line(), "bias"))
    weights = np.array([float(v) for v in field_of(next_line(), "weights").split()])
    if len(weights) != dim:
        raise DataError(f"head model: {len(weights)} weights, header says {dim}")
    return HeadModel(weights, bias, provenance, seed)
