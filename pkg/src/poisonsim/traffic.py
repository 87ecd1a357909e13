"""Background transmitter B: Bernoulli arrivals into a unit-service queue."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass
class BackgroundSource:
    """Work-conserving single-server queue, one packet served per busy slot.

    A packet arriving at the start of a slot can be served in that same slot.
    """

    arrival_rate: float = 0.8
    service_rate: int = 1
    queue_len: int = 0
    transmitting: bool = False

    def __post_init__(self):
        if not 0.0 <= self.arrival_rate <= 1.0:
            raise ValueError(f"arrival_rate must be in [0, 1], got {self.arrival_rate}")
        if self.service_rate != 1:
            raise ValueError("only unit service rate is supported")
        if self.queue_len < 0:
            raise ValueError("queue_len must be >= 0")

    def step(self, rng: np.random.Generator) -> bool:
        """Advance one slot and return whether B occupies the channel."""
        # always consume one uniform so the stream stays aligned across rates
        if rng.random() < self.arrival_rate:
            self.queue_len += 1
        self.transmitting = self.queue_len > 0
        if self.transmitting:
            self.queue_len -= 1
        return self.transmitting


def busy_fraction(trace: Sequence[bool]) -> float:
    if len(trace) == 0:
        raise ValueError("busy_fraction of an empty trace")
    return sum(bool(b) for b in trace) / len(trace)
