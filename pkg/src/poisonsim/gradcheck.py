"""Self-test of the network maths against finite differences."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import neural
from .neural import MlpArchitecture


def relative_error(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale < 1e-10 else abs(a - b) / scale


def numeric_grad(model, batch, eps: float = 1e-5):
    """Central differences for every weight and bias."""
    out = []
    for w, b in zip(model.weights, model.biases):
        layer = []
        for arr in (w, b):
            g = np.zeros_like(arr)
            flat, gflat = arr.reshape(-1), g.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                up = neural.loss(model, batch)
                flat[i] = orig - eps
                down = neural.loss(model, batch)
                flat[i] = orig
                gflat[i] = (up - down) / (2 * eps)
            layer.append(g)
        out.append(tuple(layer))
    return out


def max_grad_error(model, batch, eps: float = 1e-5, perturb: float = 0.0) -> float:
    analytic = neural.grad(model, batch)
    if perturb:
        analytic[0][0][0, 0] += perturb
    numeric = numeric_grad(model, batch, eps)
    worst = 0.0
    for (aw, ab), (nw, nb) in zip(analytic, numeric):
        for a_arr, n_arr in ((aw, nw), (ab, nb)):
            for a, n in zip(a_arr.ravel(), n_arr.ravel()):
                worst = max(worst, relative_error(float(a), float(n)))
    return worst


@dataclass
class GradcheckResult:
    max_rel_error: float
    max_softmax_dev: float
    uniform_loss_dev: float
    passed: bool


def run(n_models: int = 5, seed: int = 0, perturb: float = 0.0,
        tol: float = 1e-4) -> GradcheckResult:
    """Random small models and batches; ``perturb`` corrupts one gradient entry."""
    rng = np.random.default_rng(seed)
    arch = MlpArchitecture(input_dim=10, hidden_layers=3, hidden_width=8)
    worst_grad = worst_soft = 0.0
    for _ in range(n_models):
        model = neural.init(arch, rng, feature_transform="linear")
        for b in model.biases:
            b[:] = rng.normal(0.0, 0.1, size=b.shape)
        X = rng.normal(5.0, 3.0, size=(7, arch.input_dim))
        y = rng.integers(0, 2, size=7)
        neural.fit_normalization(model, X)
        worst_grad = max(worst_grad, max_grad_error(model, (X, y), perturb=perturb))
        worst_soft = max(worst_soft, float(np.abs(neural.forward(model, X).sum(axis=1) - 1).max()))

    flat = neural.init(arch, rng, feature_transform="linear")
    for w, b in zip(flat.weights, flat.biases):
        w[:] = 0.0
        b[:] = 0.0
    X = rng.normal(size=(6, arch.input_dim))
    uniform_dev = abs(neural.loss(flat, (X, np.array([0, 1, 0, 1, 1, 0]))) - math.log(2))

    passed = worst_grad < tol and worst_soft < 1e-9 and uniform_dev < 1e-9
    return GradcheckResult(worst_grad, worst_soft, uniform_dev, passed)
