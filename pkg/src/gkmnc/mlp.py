"""Single-hidden-layer perceptron (x-y-1) with logistic activations on both
layers, trained by conjugate gradient against a mean-squared-error loss on
{0, 1} targets. Classification thresholds the forward output at 0.5:
strictly greater means class +1, anything else class -1.

A partition containing a single class yields a constant classifier (zero
weights, saturated output bias) so tiny groups remain servable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import NormalizationParams, apply_normalizer, fit_normalizer
from .errors import DimensionMismatch, EmptyData
from .optim import CgConfig, LineSearchConfig, conjugate_gradient

CONSTANT_OUTPUT_BIAS = 20.0  # logistic(20) saturates within 1e-8 of 1


def logistic(z: np.ndarray | float) -> np.ndarray | float:
    """Numerically stable logistic sigmoid."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MlpModel:
    input_size: int
    hidden_size: int
    w1: np.ndarray  # (hidden, input)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    normalizer: NormalizationParams
    seed: int

    def __post_init__(self) -> None:
        self.w1.setflags(write=False)
        self.b1.setflags(write=False)
        self.w2.setflags(write=False)

    @property
    def architecture(self) -> str:
        return f"{self.input_size}-{self.hidden_size}-1"

    def flat_weights(self) -> np.ndarray:
        """Parameters flattened as [w1 row-major, b1, w2, b2]."""
        return np.concatenate([self.w1.ravel(), self.b1, self.w2, [self.b2]])


def _unpack(flat: np.ndarray, input_size: int, hidden_size: int):
    i = hidden_size * input_size
    w1 = flat[:i].reshape(hidden_size, input_size)
    b1 = flat[i : i + hidden_size]
    w2 = flat[i + hidden_size : i + 2 * hidden_size]
    b2 = float(flat[-1])
    return w1, b1, w2, b2


def _forward_batch(flat: np.ndarray, x: np.ndarray, input_size: int, hidden_size: int):
    w1, b1, w2, b2 = _unpack(flat, input_size, hidden_size)
    hidden = logistic(x @ w1.T + b1)
    out = logistic(hidden @ w2 + b2)
    return hidden, out


def mlp_forward(model: MlpModel, x: np.ndarray) -> float:
    """Forward pass on an already-normalized feature vector; output in (0,1)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.input_size:
        raise DimensionMismatch(f"expected {model.input_size} inputs, got {x.shape[0]}")
    _, out = _forward_batch(model.flat_weights(), x[None, :], model.input_size, model.hidden_size)
    return float(out[0])


def mlp_loss_and_gradient(
    model: MlpModel, features: np.ndarray, targets01: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean squared error over rows against {0,1} targets, with the
    backpropagated gradient flattened as [w1 row-major, b1, w2, b2]."""
    features = np.asarray(features, dtype=float)
    targets01 = np.asarray(targets01, dtype=float)
    if features.shape[0] == 0:
        raise EmptyData("loss over an empty partition")
    return _loss_and_gradient(
        model.flat_weights(), features, targets01, model.input_size, model.hidden_size
    )


def _loss_and_gradient(flat, x, t, input_size, hidden_size):
    n = x.shape[0]
    w1, b1, w2, b2 = _unpack(flat, input_size, hidden_size)
    hidden = logistic(x @ w1.T + b1)  # (n, h)
    out = logistic(hidden @ w2 + b2)  # (n,)
    err = out - t
    loss = float(np.mean(err**2))

    dz2 = (2.0 / n) * err * out * (1.0 - out)  # (n,)
    grad_w2 = hidden.T @ dz2
    grad_b2 = float(dz2.sum())
    dhidden = np.outer(dz2, w2)  # (n, h)
    dz1 = dhidden * hidden * (1.0 - hidden)
    grad_w1 = dz1.T @ x
    grad_b1 = dz1.sum(axis=0)
    grad = np.concatenate([grad_w1.ravel(), grad_b1, grad_w2, [grad_b2]])
    return loss, grad


def _constant_model(
    input_size: int, hidden_size: int, klass: int, normalizer: NormalizationParams, seed: int
) -> MlpModel:
    return MlpModel(
        input_size=input_size,
        hidden_size=hidden_size,
        w1=np.zeros((hidden_size, input_size)),
        b1=np.zeros(hidden_size),
        w2=np.zeros(hidden_size),
        b2=CONSTANT_OUTPUT_BIAS if klass == 1 else -CONSTANT_OUTPUT_BIAS,
        normalizer=normalizer,
        seed=seed,
    )


def mlp_train(
    features: np.ndarray,
    targets: np.ndarray,
    hidden_size: int,
    seed: int,
    cg: CgConfig | None = None,
    ls: LineSearchConfig | None = None,
) -> MlpModel:
    """Fit a normalizer on the raw partition, then train weights by
    conjugate gradient on the normalized features. Targets are +1/-1.
    Deterministic for a fixed seed. A single-class partition short-circuits
    to a constant classifier for that class.
    """
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=int)
    if features.shape[0] == 0:
        raise EmptyData("cannot train on an empty partition")
    if hidden_size < 1:
        raise ValueError("hidden_size must be >= 1")
    normalizer = fit_normalizer(features)
    input_size = features.shape[1]

    classes = np.unique(targets)
    if classes.size == 1:
        return _constant_model(input_size, hidden_size, int(classes[0]), normalizer, seed)

    x = apply_normalizer(normalizer, features)
    t = (targets == 1).astype(float)
    rng = np.random.default_rng(seed)
    n_params = hidden_size * input_size + 2 * hidden_size + 1
    flat0 = rng.uniform(-0.5, 0.5, size=n_params)

    cg = cg or CgConfig(max_iterations=500, gradient_norm_tolerance=1e-5)
    ls = ls or LineSearchConfig()
    flat, _ = conjugate_gradient(
        objective=lambda w: _loss_and_gradient(w, x, t, input_size, hidden_size)[0],
        gradient=lambda w: _loss_and_gradient(w, x, t, input_size, hidden_size)[1],
        x0=flat0,
        cg=cg,
        ls=ls,
    )
    w1, b1, w2, b2 = _unpack(flat, input_size, hidden_size)
    return MlpModel(
        input_size=input_size,
        hidden_size=hidden_size,
        w1=w1.copy(),
        b1=b1.copy(),
        w2=w2.copy(),
        b2=b2,
        normalizer=normalizer,
        seed=seed,
    )


def mlp_classify(model: MlpModel, x: np.ndarray) -> int:
    """Normalize a raw feature vector with the stored normalizer and
    threshold the forward output: > 0.5 is +1, otherwise -1."""
    xn = apply_normalizer(model.normalizer, np.asarray(x, dtype=float).ravel())
    return 1 if mlp_forward(model, xn) > 0.5 else -1


def mlp_classify_batch(model: MlpModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    xn = apply_normalizer(model.normalizer, features)
    _, out = _forward_batch(model.flat_weights(), xn, model.input_size, model.hidden_size)
    return np.where(out > 0.5, 1, -1)


def search_hidden_size(
    train_features: np.ndarray,
    train_targets: np.ndarray,
    val_features: np.ndarray,
    val_targets: np.ndarray,
    candidates: list[int],
    seed: int,
    cg: CgConfig | None = None,
    ls: LineSearchConfig | None = None,
) -> tuple[int, dict[int, float]]:
    """Train one model per candidate hidden size and pick the size with the
    highest validation accuracy; ties break toward the smallest size."""
    if not candidates:
        raise ValueError("candidates must be non-empty")
    accuracies: dict[int, float] = {}
    for size in candidates:
        model = mlp_train(train_features, train_targets, size, seed, cg, ls)
        pred = mlp_classify_batch(model, val_features)
        accuracies[size] = float(np.mean(pred == np.asarray(val_targets)))
    best = min(sorted(accuracies), key=lambda s: (-accuracies[s], s))
    return best, accuracies
