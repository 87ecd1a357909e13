import math

import numpy as np

from poisonsim import neural
from poisonsim.neural import MlpArchitecture


def constant_model(p_positive: float, input_dim: int = 10) -> neural.MlpClassifier:
    """Trained-flagged classifier that outputs ``p_positive`` for every input."""
    m = neural.init(MlpArchitecture(input_dim, 1, 2), 0, "linear")
    for w, b in zip(m.weights, m.biases):
        w[:] = 0.0
        b[:] = 0.0
    m.biases[-1][:] = [0.0, math.log(p_positive / (1 - p_positive))]
    m.trained = True
    return m


def threshold_model(cut: float, input_dim: int = 10) -> neural.MlpClassifier:
    """Positive iff the newest feature exceeds ``cut`` (a steep logistic)."""
    m = neural.init(MlpArchitecture(input_dim, 1, 1), 0, "linear")
    m.weights[0][:] = 0.0
    m.weights[0][-1, 0] = 1.0
    m.biases[0][:] = -cut
    m.weights[1][:] = [[0.0, 1000.0]]
    m.biases[1][:] = [0.0, 0.0]
    # hidden unit is relu(x - cut); add a small negative offset so x == cut is negative
    m.biases[1][1] = -1e-6
    m.trained = True
    return m
