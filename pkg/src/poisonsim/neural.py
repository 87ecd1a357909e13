"""Feedforward ReLU classifier with softmax output, trained by mini-batch SGD.

Both the transmitter and the adversary use this network. Layers store their
weights as ``(fan_in, fan_out)`` arrays so a batch ``X`` of shape
``(n, input_dim)`` propagates as ``X @ W + b``. Class 1 is the "positive"
class (busy for the transmitter, ACK for the adversary); the decision
threshold applies to its softmax probability.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

PROB_FLOOR = 1e-12
POWER_FLOOR = 1e-3   # lowest power mapped to dB (-30 dB under the unit noise floor)
TRANSFORMS = ("linear", "db")
FORMAT_NAME = "poisonsim-mlp"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class MlpArchitecture:
    input_dim: int = 10
    hidden_layers: int = 3
    hidden_width: int = 100
    output_dim: int = 2

    def __post_init__(self):
        for name in ("input_dim", "hidden_layers", "hidden_width"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.output_dim != 2:
            raise ValueError("output_dim is fixed at 2")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim] + [self.hidden_width] * self.hidden_layers + [self.output_dim]


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 100
    steps: int = 1000
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")


@dataclass
class LabeledSample:
    features: np.ndarray
    label: int


@dataclass
class MlpClassifier:
    arch: MlpArchitecture
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feature_means: np.ndarray
    feature_stds: np.ndarray
    decision_threshold: float = 0.5
    trained: bool = False
    feature_transform: str = "db"

    def __post_init__(self):
        if self.feature_transform not in TRANSFORMS:
            raise ValueError(f"feature_transform must be one of {TRANSFORMS}")
        sizes = self.arch.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(self.weights):
            raise ValueError("layer count does not match architecture")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise ValueError(f"layer {i} has shapes {w.shape}/{b.shape}, "
                                 f"expected {(sizes[i], sizes[i + 1])}")
        if np.any(self.feature_stds <= 0):
            raise ValueError("feature_stds must be > 0")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError("decision_threshold must be in (0, 1)")

    def copy(self) -> "MlpClassifier":
        return copy.deepcopy(self)


Batch = Union[Sequence[LabeledSample], tuple]


def as_arrays(batch: Batch) -> tuple[np.ndarray, np.ndarray]:
    """Accept a sequence of samples or an ``(X, y)`` pair; return float/int arrays."""
    if isinstance(batch, tuple) and len(batch) == 2 and isinstance(batch[0], np.ndarray):
        X, y = batch
    else:
        if len(batch) == 0:
            raise ValueError("empty batch")
        X = np.stack([np.asarray(s.features, dtype=float) for s in batch])
        y = np.array([int(s.label) for s in batch])
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    if X.shape[0] != y.shape[0]:
        raise ValueError("features and labels differ in length")
    return X, y


def init(arch: MlpArchitecture, seed: int | np.random.Generator,
         feature_transform: str = "db") -> MlpClassifier:
    """He-scaled normal weights, zero biases, identity normalization."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sizes = arch.layer_sizes
    weights = [rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
               for fan_in, fan_out in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(n) for n in sizes[1:]]
    return MlpClassifier(arch, weights, biases,
                         feature_means=np.zeros(arch.input_dim),
                         feature_stds=np.ones(arch.input_dim),
                         feature_transform=feature_transform)


def transform_features(model: MlpClassifier, X: np.ndarray) -> np.ndarray:
    """Map raw sensed powers into the space the normalization stats live in."""
    if model.feature_transform == "db":
        return 10.0 * np.log10(np.maximum(X, POWER_FLOOR))
    return X


def _check_dim(model: MlpClassifier, X: np.ndarray):
    if X.shape[-1] != model.arch.input_dim:
        raise ValueError(f"expected {model.arch.input_dim} features, got {X.shape[-1]}")


def _logits(model: MlpClassifier, X: np.ndarray):
    """Return output logits and the per-layer cache needed for backprop."""
    a = (transform_features(model, X) - model.feature_means) / model.feature_stds
    cache = [a]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        if i == last:
            return z, cache
        a = np.maximum(z, 0.0)
        cache.append(a)
    raise AssertionError("unreachable")


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def forward(model: MlpClassifier, features) -> np.ndarray:
    """Class probabilities for one feature vector (shape ``(2,)``) or a batch."""
    x = np.asarray(features, dtype=float)
    _check_dim(model, x)
    z, _ = _logits(model, np.atleast_2d(x))
    # float64 softmax saturates to exactly 0/1 past a logit gap of ~37
    p = np.clip(np.exp(_log_softmax(z)), PROB_FLOOR, 1.0 - PROB_FLOOR)
    return p[0] if x.ndim == 1 else p


def loss(model: MlpClassifier, batch: Batch) -> float:
    """Mean categorical cross-entropy."""
    X, y = as_arrays(batch)
    _check_dim(model, X)
    z, _ = _logits(model, X)
    logp = np.maximum(_log_softmax(z)[np.arange(len(y)), y], math.log(PROB_FLOOR))
    return float(-logp.mean())


def grad(model: MlpClassifier, batch: Batch) -> list[tuple[np.ndarray, np.ndarray]]:
    """Exact gradient of :func:`loss` as ``[(dW, db), ...]`` per layer."""
    X, y = as_arrays(batch)
    _check_dim(model, X)
    n = X.shape[0]
    z, cache = _logits(model, X)
    delta = np.exp(_log_softmax(z))
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads = []
    for i in range(len(model.weights) - 1, -1, -1):
        a_in = cache[i]
        grads.append((a_in.T @ delta, delta.sum(axis=0)))
        if i > 0:
            delta = (delta @ model.weights[i].T) * (a_in > 0)
    grads.reverse()
    return grads


def fit_normalization(model: MlpClassifier, X: np.ndarray) -> None:
    Z = transform_features(model, X)
    model.feature_means = Z.mean(axis=0)
    std = Z.std(axis=0)
    # a constant feature carries no information; leave it unscaled
    model.feature_stds = np.where(std > 0, std, 1.0)


def train(model: MlpClassifier, data: Batch, cfg: TrainConfig,
          loss_log: list | None = None) -> MlpClassifier:
    """Fit normalization stats, then run ``cfg.steps`` SGD steps.

    Mini-batches are drawn uniformly with replacement. The input model is not
    modified. If ``loss_log`` is given, the batch loss before each step is
    appended to it.
    """
    X, y = as_arrays(data)
    _check_dim(model, X)
    out = model.copy()
    fit_normalization(out, X)
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.steps):
        idx = rng.integers(0, len(y), size=cfg.batch_size)
        batch = (X[idx], y[idx])
        if loss_log is not None:
            loss_log.append(loss(out, batch))
        for (w, b), (dw, db) in zip(zip(out.weights, out.biases), grad(out, batch)):
            w -= cfg.learning_rate * dw
            b -= cfg.learning_rate * db
    out.trained = True
    return out


def candidate_thresholds(scores: np.ndarray) -> np.ndarray:
    """Midpoints between consecutive distinct scores, plus 0.5.

    Each midpoint realizes one split of the sorted scores, and sits in the
    middle of its gap rather than on a sample.
    """
    u = np.unique(scores)
    return np.unique(np.append((u[1:] + u[:-1]) / 2.0, 0.5))


def best_threshold(scores: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """Threshold on positive-class scores minimizing the worse per-class error.

    A sample is called positive when its score is >= the threshold. Ties go
    to the candidate closest to 0.5, then to the smaller one. Returns
    ``(threshold, max_error)``.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("threshold tuning needs both classes in the validation set")

    cands = candidate_thresholds(scores)
    order = np.argsort(scores, kind="stable")
    s_sorted = scores[order]
    pos_cum = np.concatenate([[0], np.cumsum(labels[order] == 1)])
    # samples scoring below each candidate, split by class
    below = np.searchsorted(s_sorted, cands, side="left")
    pos_below = pos_cum[below]
    neg_below = below - pos_below
    err_pos = pos_below / n_pos                  # positives called negative
    err_neg = (n_neg - neg_below) / n_neg        # negatives called positive
    worst = np.maximum(err_pos, err_neg)

    tied = cands[worst == worst.min()]
    dist = np.abs(tied - 0.5)
    return float(tied[dist == dist.min()].min()), float(worst.min())


def positive_scores(model: MlpClassifier, data: Batch) -> tuple[np.ndarray, np.ndarray]:
    X, y = as_arrays(data)
    return forward(model, X)[:, 1], y


def tune_threshold(model: MlpClassifier, validation: Batch) -> float:
    scores, y = positive_scores(model, validation)
    thr, _ = best_threshold(scores, y)
    return thr


def predict(model: MlpClassifier, features) -> np.ndarray | bool:
    """True (positive class) iff its probability is >= the decision threshold."""
    p = forward(model, features)
    if p.ndim == 1:
        return bool(p[1] >= model.decision_threshold)
    return p[:, 1] >= model.decision_threshold


def error_counts(model: MlpClassifier, data: Batch) -> dict[str, int]:
    """Per-class miss counts on labelled data, using the stored threshold."""
    X, y = as_arrays(data)
    pred = predict(model, X).astype(int)
    return {
        "n_pos": int((y == 1).sum()),
        "n_neg": int((y == 0).sum()),
        "pos_missed": int(((y == 1) & (pred == 0)).sum()),
        "neg_flagged": int(((y == 0) & (pred == 1)).sum()),
    }


def to_dict(model: MlpClassifier) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "architecture": {
            "input_dim": model.arch.input_dim,
            "hidden_layers": model.arch.hidden_layers,
            "hidden_width": model.arch.hidden_width,
            "output_dim": model.arch.output_dim,
        },
        "feature_means": model.feature_means.tolist(),
        "feature_stds": model.feature_stds.tolist(),
        "decision_threshold": model.decision_threshold,
        "trained": model.trained,
        "feature_transform": model.feature_transform,
        "layers": [{"weights": w.tolist(), "bias": b.tolist()}
                   for w, b in zip(model.weights, model.biases)],
    }


def from_dict(d: dict) -> MlpClassifier:
    if d.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} document")
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model version {d.get('version')}")
    arch = MlpArchitecture(**d["architecture"])
    return MlpClassifier(
        arch,
        weights=[np.array(layer["weights"], dtype=float) for layer in d["layers"]],
        biases=[np.array(layer["bias"], dtype=float) for layer in d["layers"]],
        feature_means=np.array(d["feature_means"], dtype=float),
        feature_stds=np.array(d["feature_stds"], dtype=float),
        decision_threshold=float(d["decision_threshold"]),
        trained=bool(d.get("trained", False)),
        feature_transform=d.get("feature_transform", "linear"),
    )


def save(model: MlpClassifier, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_dict(model), indent=1))


def load(path: str | Path) -> MlpClassifier:
    return from_dict(json.loads(Path(path).read_text()))
