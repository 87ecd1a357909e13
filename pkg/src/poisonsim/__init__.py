"""Simulator of an over-the-air spectrum data poisoning attack.

A cognitive transmitter classifies the channel from its last sensed powers
and transmits on idle slots; an adversary learns to predict the receiver's
ACKs from its own sensing and, when it expects one, transmits briefly during
the sensing period so the transmitter sees a busy channel and stays silent.
"""

from .agents import AttackMode
from .config import RunConfig, load_config
from .simulation import Scenario, SlotRecord, run_eval, train_agents

__all__ = ["AttackMode", "RunConfig", "Scenario", "SlotRecord", "load_config",
           "run_eval", "train_agents"]
__version__ = "0.1.0"
