"""Propagation and link-success model.

Every power is expressed in units of the receiver noise floor, so a noise
sample has mean 1 by default and a transmit power of 1000 is 30 dB above it.
Gains and noise are Gaussian around their means and clamped at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite position ({self.x}, {self.y})")


@dataclass(frozen=True)
class LinkModel:
    gain_mean: float
    gain_rel_std: float = 0.1
    source: str = ""
    dest: str = ""

    def __post_init__(self):
        if not self.gain_mean > 0:
            raise ValueError(f"gain_mean must be > 0, got {self.gain_mean}")
        if self.gain_rel_std < 0:
            raise ValueError(f"gain_rel_std must be >= 0, got {self.gain_rel_std}")


@dataclass(frozen=True)
class NoiseModel:
    mean_power: float = 1.0
    rel_std: float = 0.1

    def __post_init__(self):
        if not self.mean_power > 0:
            raise ValueError(f"mean_power must be > 0, got {self.mean_power}")
        if self.rel_std < 0:
            raise ValueError(f"rel_std must be >= 0, got {self.rel_std}")


def distance(a: Position, b: Position) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def mean_gain(d: float, exponent: float = 2.0) -> float:
    """Free-space mean power gain ``d**-exponent``."""
    if not d > 0:
        raise ValueError(f"distance must be > 0, got {d}")
    return d ** (-exponent)


def link_between(a: Position, b: Position, rel_std: float = 0.1,
                 exponent: float = 2.0, source: str = "", dest: str = "") -> LinkModel:
    return LinkModel(mean_gain(distance(a, b), exponent), rel_std, source, dest)


def _clamped_normal(mean: float, std: float, rng: np.random.Generator) -> float:
    if std == 0:
        return mean
    return max(0.0, float(rng.normal(mean, std)))


def sample_gain(link: LinkModel, rng: np.random.Generator) -> float:
    return _clamped_normal(link.gain_mean, link.gain_rel_std * link.gain_mean, rng)


def sample_noise(noise: NoiseModel, rng: np.random.Generator) -> float:
    return _clamped_normal(noise.mean_power, noise.rel_std * noise.mean_power, rng)


def sinr(signal: float, interference: float, noise: float) -> float:
    if not noise > 0:
        raise ValueError(f"noise power must be > 0, got {noise}")
    if signal < 0 or interference < 0:
        raise ValueError("signal and interference powers must be >= 0")
    return signal / (noise + interference)


def is_success(sinr_value: float, threshold: float) -> bool:
    # inclusive: a link at exactly the threshold still decodes
    if not threshold > 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    return sinr_value >= threshold
