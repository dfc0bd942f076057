"""Pattern classifiers over encoded windows.

Two implementations share one predict() contract: a rule-backed reference
classifier (decode the tensor, run the pattern rules) and a small trainable
convolutional network - one valid 3x3 conv layer with 8 filters, ReLU, and a
dense softmax head - trained by plain mini-batch gradient descent with
analytically derived gradients that grad_check verifies against central
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Protocol, Sequence

import numpy as np

from . import _kernels
from .gaf import GafTensor, decode_tensor
from .ohlc import PatternLabel, RuleParams, match_pattern

N_CLASSES = 8
N_FILTERS = 8
KERNEL = 3


class ClassifierError(ValueError):
    pass


class ShapeMismatch(ClassifierError):
    pass


class EmptyDataset(ClassifierError):
    pass


class InconsistentShapes(ClassifierError):
    pass


class ModelFormatError(ClassifierError):
    pass


class Classifier(Protocol):
    def predict(self, t: GafTensor) -> PatternLabel: ...


@dataclass(frozen=True)
class Prediction:
    probabilities: np.ndarray  # (8,), nonnegative, sums to 1
    label: PatternLabel


@dataclass
class ClassifierModel:
    conv_kernels: np.ndarray   # (8, 4, 3, 3)
    conv_bias: np.ndarray      # (8,)
    dense_weights: np.ndarray  # (8 * (T-2)^2, 8)
    dense_bias: np.ndarray     # (8,)
    seed: int

    @property
    def window_size(self) -> int:
        side = int(round(np.sqrt(self.dense_weights.shape[0] / N_FILTERS)))
        return side + KERNEL - 1

    def params(self) -> list[np.ndarray]:
        return [self.conv_kernels, self.conv_bias, self.dense_weights, self.dense_bias]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 50
    batch_size: int = 32
    seed: int = 0
    l2: float = 0.0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")


def init_model(T: int = 10, seed: int = 0) -> ClassifierModel:
    """Uniform init in +/- sqrt(6 / (fan_in + fan_out)); zero biases."""
    rng = np.random.default_rng(seed)
    feat = N_FILTERS * (T - KERNEL + 1) ** 2
    conv_limit = np.sqrt(6.0 / (4 * KERNEL * KERNEL + N_FILTERS * KERNEL * KERNEL))
    dense_limit = np.sqrt(6.0 / (feat + N_CLASSES))
    return ClassifierModel(
        conv_kernels=rng.uniform(-conv_limit, conv_limit, size=(N_FILTERS, 4, KERNEL, KERNEL)),
        conv_bias=np.zeros(N_FILTERS),
        dense_weights=rng.uniform(-dense_limit, dense_limit, size=(feat, N_CLASSES)),
        dense_bias=np.zeros(N_CLASSES),
        seed=seed,
    )


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_batch(m: ClassifierModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """x: (N, 4, T, T) -> probabilities (N, 8) plus the conv pre-activation
    and flattened activation needed for the backward pass."""
    pre = _kernels.conv2d_forward(x, m.conv_kernels, m.conv_bias)  # (N, F, T-2, T-2)
    act = np.maximum(pre, 0.0)
    flat = act.reshape(x.shape[0], -1)
    logits = flat @ m.dense_weights + m.dense_bias
    return _softmax(logits), pre, flat


def _check_tensor(m: ClassifierModel, t: GafTensor) -> np.ndarray:
    x = t.channels
    T = m.window_size
    if x.shape != (4, T, T):
        raise ShapeMismatch(f"model expects (4, {T}, {T}) channels, got {x.shape}")
    return x[None]


def forward(m: ClassifierModel, t: GafTensor) -> Prediction:
    """Single-tensor forward pass; argmax ties break to the lowest class."""
    probs = _forward_batch(m, _check_tensor(m, t))[0][0]
    return Prediction(probs, PatternLabel(int(np.argmax(probs)) + 1))


def _loss_and_grads(
    m: ClassifierModel, x: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy over the batch (plus l2/2 * ||weights||^2) and its
    gradients in ClassifierModel.params() order."""
    n = x.shape[0]
    probs, pre, flat = _forward_batch(m, x)
    eps = 1e-12
    loss = -float(np.mean(np.log(probs[np.arange(n), y] + eps)))
    if l2:
        loss += 0.5 * l2 * (float(np.sum(m.conv_kernels**2)) + float(np.sum(m.dense_weights**2)))

    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    d_dense_w = flat.T @ dlogits
    d_dense_b = dlogits.sum(axis=0)
    dflat = dlogits @ m.dense_weights.T
    dpre = dflat.reshape(pre.shape) * (pre > 0)
    d_conv_k, d_conv_b = _kernels.conv2d_param_grads(x, dpre, KERNEL, KERNEL)
    if l2:
        d_conv_k = d_conv_k + l2 * m.conv_kernels
        d_dense_w = d_dense_w + l2 * m.dense_weights
    return loss, [d_conv_k, d_conv_b, d_dense_w, d_dense_b]


def _stack_dataset(data: Sequence[tuple[GafTensor, PatternLabel]]) -> tuple[np.ndarray, np.ndarray]:
    if not data:
        raise EmptyDataset("training set is empty")
    shapes = {t.channels.shape for t, _ in data}
    if len(shapes) != 1:
        raise InconsistentShapes(f"mixed tensor shapes: {sorted(shapes)}")
    x = np.stack([t.channels for t, _ in data])
    y = np.array([int(label) - 1 for _, label in data], dtype=int)
    if np.any(y < 0):
        raise ClassifierError("training labels must be pattern classes, not NONE")
    return x, y


def train(
    data: Sequence[tuple[GafTensor, PatternLabel]],
    cfg: TrainConfig = TrainConfig(),
) -> tuple[ClassifierModel, list[float]]:
    """Mini-batch gradient descent on mean cross-entropy.

    Deterministic for a fixed config: init and shuffle order both derive from
    cfg.seed. Returns the model and the per-epoch mean loss history.
    """
    x, y = _stack_dataset(data)
    if len(np.unique(y)) < 2:
        raise ClassifierError("need at least two classes to train")
    T = x.shape[-1]
    model = init_model(T=T, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed + 1)
    n = x.shape[0]
    history: list[float] = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = _loss_and_grads(model, x[idx], y[idx], cfg.l2)
            total += loss * len(idx)
            for p, g in zip(model.params(), grads):
                p -= cfg.learning_rate * g
        history.append(total / n)
    return model, history


def accuracy(m: ClassifierModel, data: Sequence[tuple[GafTensor, PatternLabel]]) -> float:
    x, y = _stack_dataset(data)
    probs = _forward_batch(m, x)[0]
    return float(np.mean(np.argmax(probs, axis=1) == y))


def grad_check(
    m: ClassifierModel,
    sample: tuple[GafTensor, PatternLabel],
    eps: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients
    over every parameter of the model."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    t, label = sample
    x = _check_tensor(m, t)
    y = np.array([int(label) - 1])

    def loss_at() -> float:
        return _loss_and_grads(m, x, y, 0.0)[0]

    _, grads = _loss_and_grads(m, x, y, 0.0)
    worst = 0.0
    for p, g in zip(m.params(), grads):
        for i in range(p.size):
            orig = p.flat[i]
            p.flat[i] = orig + eps
            up = loss_at()
            p.flat[i] = orig - eps
            down = loss_at()
            p.flat[i] = orig
            numeric = (up - down) / (2.0 * eps)
            analytic = g.flat[i]
            denom = max(abs(analytic), abs(numeric), 1e-8)
            worst = max(worst, abs(analytic - numeric) / denom)
    return worst


class RuleClassifier:
    """Deterministic reference classifier: decode the tensor, run the rules."""

    def __init__(self, params: RuleParams = RuleParams()) -> None:
        self.params = params

    def predict(self, t: GafTensor) -> PatternLabel:
        return match_pattern(decode_tensor(t), self.params)


class CnnClassifier:
    """Trained-network classifier satisfying the same predict contract."""

    def __init__(self, model: ClassifierModel) -> None:
        self.model = model

    def predict(self, t: GafTensor) -> PatternLabel:
        return forward(self.model, t).label


MODEL_HEADER = "gafcnn-model v1"


def _tensor_lines(name: str, arr: np.ndarray) -> str:
    shape = " ".join(str(d) for d in arr.shape)
    values = " ".join(format(v, ".17g") for v in arr.reshape(-1))
    return f"{name} {shape} {values}"


def save_model(m: ClassifierModel, path) -> None:
    """Line-oriented text format: header, window size, then one line per
    tensor as `name shape... values...` at 17 significant digits."""
    lines = [MODEL_HEADER, str(m.window_size)]
    lines.append(_tensor_lines("conv_kernels", m.conv_kernels))
    lines.append(_tensor_lines("conv_bias", m.conv_bias))
    lines.append(_tensor_lines("dense_weights", m.dense_weights))
    lines.append(_tensor_lines("dense_bias", m.dense_bias))
    lines.append(f"seed {m.seed}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_tensor(line: str, name: str, ndim: int) -> np.ndarray:
    parts = line.split()
    if parts[0] != name:
        raise ModelFormatError(f"expected tensor {name!r}, found {parts[0]!r}")
    shape = tuple(int(v) for v in parts[1 : 1 + ndim])
    values = np.array([float(v) for v in parts[1 + ndim :]])
    if values.size != int(np.prod(shape)):
        raise ModelFormatError(f"tensor {name!r}: {values.size} values for shape {shape}")
    return values.reshape(shape)


def load_model(path) -> ClassifierModel:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != MODEL_HEADER:
        raise ModelFormatError(f"bad header; expected {MODEL_HEADER!r}")
    seed = 0
    if lines[-1].startswith("seed "):
        seed = int(lines[-1].split()[1])
        lines = lines[:-1]
    return ClassifierModel(
        conv_kernels=_parse_tensor(lines[2], "conv_kernels", 4),
        conv_bias=_parse_tensor(lines[3], "conv_bias", 1),
        dense_weights=_parse_tensor(lines[4], "dense_weights", 2),
        dense_bias=_parse_tensor(lines[5], "dense_bias", 1),
        seed=seed,
    )
