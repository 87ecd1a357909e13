"""Transmitter and adversary: sensing windows, sample construction, decisions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import neural
from .neural import LabeledSample, MlpClassifier

BUSY = 1
IDLE = 0
ACK = 1
NO_ACK = 0


class AttackMode(str, Enum):
    NONE = "none"
    POISON = "poison"
    JAM = "jam"


class NotReady(RuntimeError):
    """Raised when a window is not yet full or a model is untrained."""


class SensingWindow:
    """The most recent ``length`` sensed powers, oldest first."""

    def __init__(self, length: int = 10):
        if length < 1:
            raise ValueError("window length must be >= 1")
        self.length = length
        self._buf: deque[float] = deque(maxlen=length)

    def push(self, power: float) -> None:
        if power < 0:
            raise ValueError(f"sensed power must be >= 0, got {power}")
        self._buf.append(float(power))

    @property
    def full(self) -> bool:
        return len(self._buf) == self.length

    def values(self) -> np.ndarray:
        return np.array(self._buf)

    def __len__(self) -> int:
        return len(self._buf)


def _require_ready(window: SensingWindow, model: MlpClassifier | None = None):
    if not window.full:
        raise NotReady(f"window holds {len(window)} of {window.length} readings")
    if model is not None and not model.trained:
        raise NotReady("classifier has not been trained")


@dataclass
class TransmitterAgent:
    window: SensingWindow = field(default_factory=SensingWindow)
    model: MlpClassifier | None = None
    defense_flip_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.defense_flip_prob <= 1.0:
            raise ValueError("defense_flip_prob must be in [0, 1]")

    def observe(self, sensed_power: float) -> SensingWindow:
        self.window.push(sensed_power)
        return self.window

    def build_sample(self, busy: bool) -> LabeledSample:
        _require_ready(self.window)
        return LabeledSample(self.window.values(), BUSY if busy else IDLE)

    def predicts_idle(self) -> bool:
        if self.model is None:
            raise NotReady("transmitter has no classifier")
        _require_ready(self.window, self.model)
        return not neural.predict(self.model, self.window.values())

    def apply_defense(self, transmit: bool, rng: np.random.Generator) -> bool:
        """Invert the decision with probability ``defense_flip_prob``.

        One uniform is consumed per call regardless of the setting.
        """
        flip = rng.random() < self.defense_flip_prob
        return transmit != flip

    def decide(self, rng: np.random.Generator) -> bool:
        return self.apply_defense(self.predicts_idle(), rng)


@dataclass
class AdversaryAgent:
    window: SensingWindow = field(default_factory=SensingWindow)
    model: MlpClassifier | None = None
    attack_mode: AttackMode = AttackMode.NONE
    attack_power: float = 1000.0

    def __post_init__(self):
        self.attack_mode = AttackMode(self.attack_mode)
        if self.attack_mode is not AttackMode.NONE and not self.attack_power > 0:
            raise ValueError("attack_power must be > 0 when attacking")

    def observe(self, sensed_power: float) -> SensingWindow:
        self.window.push(sensed_power)
        return self.window

    def label_slot(self, ack_seen: bool) -> LabeledSample | None:
        """Resolve the slot's ACK outcome; a sample only once the window is full."""
        if not self.window.full:
            return None
        return LabeledSample(self.window.values(), ACK if ack_seen else NO_ACK)

    def predicts_ack(self) -> bool:
        if self.model is None:
            raise NotReady("adversary has no classifier")
        _require_ready(self.window, self.model)
        return bool(neural.predict(self.model, self.window.values()))

    def decide(self) -> bool:
        if self.attack_mode is AttackMode.NONE:
            return False
        return self.predicts_ack()
