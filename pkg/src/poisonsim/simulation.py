"""Slot pipeline: sensing, decisions, attack, data transmission and ACK.

Every slot runs the same fixed phase order::

    traffic -> channel draws -> A senses/decides -> T senses (poison lands here)
    -> T decides -> data period at R (jamming lands here) -> ACK

Randomness comes from independent named streams keyed on (seed, phase,
stream), and every stream is consumed identically whatever the mode, so two
runs that differ only in attack mode see the same traffic, gains and noise.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import channel, neural
from .agents import AdversaryAgent, AttackMode, SensingWindow, TransmitterAgent
from .channel import LinkModel, NoiseModel, Position
from .neural import LabeledSample, MlpArchitecture, MlpClassifier, TrainConfig
from .traffic import BackgroundSource

LINKS = ("BT", "BA", "TR", "BR", "AT", "AR")
NOISES = ("T", "A", "R")

_PHASES = {"collect": 0, "collect_a": 1, "eval": 2, "init_T": 3, "init_A": 4,
           "train_T": 5, "train_A": 6}
_STREAMS = {name: i for i, name in enumerate(
    ["traffic", "defense", "ack"] + [f"gain_{l}" for l in LINKS]
    + [f"noise_{n}" for n in NOISES] + ["model"])}


class TransmitPolicy(str, Enum):
    CLASSIFIER = "classifier"
    GENIE = "genie"      # transmit iff the channel is truly idle
    ALWAYS = "always"    # counterfactual probe: every slot is attempted


class Collection(str, Enum):
    GENIE = "genie"
    TWO_PHASE = "two_phase"


class Split(str, Enum):
    TWO_WAY = "two_way"
    THREE_WAY = "three_way"


@dataclass(frozen=True)
class Scenario:
    pos_B: Position = Position(0.0, 10.0)
    pos_T: Position = Position(0.0, 0.0)
    pos_R: Position = Position(10.0, 0.0)
    pos_A: Position = Position(10.0, 10.0)
    power_B: float = 1000.0
    power_T: float = 1000.0
    power_A: float = 1000.0
    sinr_threshold: float = 3.0
    arrival_rate: float = 0.8
    gain_rel_std: float = 0.1
    noise_rel_std: float = 0.1
    noise_power: float = 1.0
    pathloss_exponent: float = 2.0
    static_gains: bool = False
    window_len: int = 10
    n_train_slots: int = 1000
    n_eval_slots: int = 500
    sensing_fraction: float = 0.1
    data_fraction: float = 0.8
    collection: Collection = Collection.GENIE
    split: Split = Split.TWO_WAY
    hidden_layers: int = 3
    hidden_width: int = 100
    batch_size: int = 100
    train_steps: int = 1000
    learning_rate: float = 0.1
    feature_transform: str = "db"
    defense_flip_prob: float = 0.0
    ack_miss_prob: float = 0.0
    ack_false_prob: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "collection", Collection(self.collection))
        object.__setattr__(self, "split", Split(self.split))
        for name in ("power_B", "power_T", "power_A", "sinr_threshold", "noise_power",
                     "pathloss_exponent", "learning_rate"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("arrival_rate", "defense_flip_prob", "ack_miss_prob", "ack_false_prob",
                     "sensing_fraction", "data_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.feature_transform not in neural.TRANSFORMS:
            raise ValueError(f"feature_transform must be one of {neural.TRANSFORMS}")
        if self.sensing_fraction + self.data_fraction > 1.0:
            raise ValueError("sensing_fraction + data_fraction must be <= 1")
        for name in ("gain_rel_std", "noise_rel_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("window_len", "n_eval_slots", "hidden_layers", "hidden_width",
                     "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.train_steps < 0:
            raise ValueError("train_steps must be >= 0")
        if self.n_train_slots <= self.window_len:
            raise ValueError("n_train_slots must exceed window_len")
        for a, b in [("B", "T"), ("B", "A"), ("T", "R"), ("B", "R"), ("A", "T"), ("A", "R")]:
            if channel.distance(self.position(a), self.position(b)) == 0:
                raise ValueError(f"nodes {a} and {b} are co-located")

    def position(self, node: str) -> Position:
        return getattr(self, f"pos_{node}")

    def link(self, name: str) -> LinkModel:
        src, dst = name[0], name[1]
        return channel.link_between(self.position(src), self.position(dst),
                                    self.gain_rel_std, self.pathloss_exponent, src, dst)

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(self.noise_power, self.noise_rel_std)

    @property
    def architecture(self) -> MlpArchitecture:
        return MlpArchitecture(self.window_len, self.hidden_layers, self.hidden_width)


@dataclass
class SlotRecord:
    slot: int
    b_busy: bool
    p_T: float
    p_A: float
    t_transmit: bool
    a_attack: bool
    sinr_at_R: float | None
    success: bool
    energy_A: float

    def __post_init__(self):
        if self.success and not self.t_transmit:
            raise ValueError("success without a transmission")
        if (self.sinr_at_R is not None) != self.t_transmit:
            raise ValueError("sinr must be present exactly when T transmits")

    @property
    def ack(self) -> bool:
        return self.success


CSV_COLUMNS = [f.name for f in fields(SlotRecord)]


class Streams:
    """Named, independent generators for one (seed, phase)."""

    def __init__(self, seed: int, phase: str):
        self.seed = seed
        self.phase = phase
        self._rngs: dict[str, np.random.Generator] = {}

    def __getitem__(self, name: str) -> np.random.Generator:
        if name not in self._rngs:
            ss = np.random.SeedSequence(self.seed, spawn_key=(_PHASES[self.phase], _STREAMS[name]))
            self._rngs[name] = np.random.default_rng(ss)
        return self._rngs[name]


def derived_int(seed: int, phase: str) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(_PHASES[phase], _STREAMS["model"]))
    return int(ss.generate_state(1)[0])


@dataclass
class SimState:
    scenario: Scenario
    streams: Streams
    transmitter: TransmitterAgent
    adversary: AdversaryAgent
    mode: AttackMode = AttackMode.NONE
    t_policy: TransmitPolicy = TransmitPolicy.CLASSIFIER
    source: BackgroundSource = None
    slot: int = 0
    decisions: bool = True
    t_samples: list = field(default_factory=list)
    a_samples: list = field(default_factory=list)
    _static: dict | None = None

    def __post_init__(self):
        if self.source is None:
            self.source = BackgroundSource(self.scenario.arrival_rate)
        self.mode = AttackMode(self.mode)
        self.t_policy = TransmitPolicy(self.t_policy)


def new_state(scenario: Scenario, seed: int, phase: str, *,
              t_model: MlpClassifier | None = None, a_model: MlpClassifier | None = None,
              mode: AttackMode = AttackMode.NONE,
              t_policy: TransmitPolicy = TransmitPolicy.CLASSIFIER) -> SimState:
    w = scenario.window_len
    tx = TransmitterAgent(SensingWindow(w), t_model, scenario.defense_flip_prob)
    adv = AdversaryAgent(SensingWindow(w), a_model, AttackMode(mode), scenario.power_A)
    return SimState(scenario, Streams(seed, phase), tx, adv, mode, t_policy)


def _draw_channel(state: SimState) -> tuple[dict, dict]:
    sc, st = state.scenario, state.streams
    if sc.static_gains:
        if state._static is None:
            state._static = {l: channel.sample_gain(sc.link(l), st[f"gain_{l}"]) for l in LINKS}
        gains = state._static
    else:
        gains = {l: channel.sample_gain(sc.link(l), st[f"gain_{l}"]) for l in LINKS}
    noise = {n: channel.sample_noise(sc.noise, st[f"noise_{n}"]) for n in NOISES}
    return gains, noise


def run_slot(state: SimState) -> SlotRecord:
    """Advance one slot and return its record (samples accumulate on ``state``)."""
    sc, st = state.scenario, state.streams
    tx, adv = state.transmitter, state.adversary

    busy = state.source.step(st["traffic"])
    g, n = _draw_channel(state)
    defense_u = st["defense"].random()
    ack_u = st["ack"].random()

    p_A = n["A"] + g["BA"] * sc.power_B * busy
    adv.observe(p_A)
    attack = state.decisions and adv.window.full and adv.decide()
    poison = attack and state.mode is AttackMode.POISON
    jam = attack and state.mode is AttackMode.JAM

    p_T = n["T"] + g["BT"] * sc.power_B * busy + g["AT"] * sc.power_A * poison
    tx.observe(p_T)

    if state.t_policy is TransmitPolicy.ALWAYS:
        transmit = True
    elif state.t_policy is TransmitPolicy.GENIE:
        transmit = (not busy) != (defense_u < tx.defense_flip_prob)
    else:
        transmit = (state.decisions and tx.window.full
                    and (tx.predicts_idle() != (defense_u < tx.defense_flip_prob)))

    ratio = None
    success = False
    if transmit:
        interference = g["BR"] * sc.power_B * busy + g["AR"] * sc.power_A * jam
        ratio = channel.sinr(g["TR"] * sc.power_T, interference, n["R"])
        success = channel.is_success(ratio, sc.sinr_threshold)

    # A detects ACK presence only; optional imperfect detection
    heard = (ack_u >= sc.ack_miss_prob) if success else (ack_u < sc.ack_false_prob)

    if tx.window.full:
        state.t_samples.append(tx.build_sample(busy))
    a_sample = adv.label_slot(heard)
    if a_sample is not None:
        state.a_samples.append(a_sample)

    energy = 0.0
    if poison:
        energy = sc.power_A * sc.sensing_fraction
    elif jam:
        energy = sc.power_A * sc.data_fraction

    rec = SlotRecord(state.slot, bool(busy), float(p_T), float(p_A), bool(transmit),
                     bool(attack), ratio, bool(success), energy)
    state.slot += 1
    return rec


def collect_training(scenario: Scenario, seed: int, t_model: MlpClassifier | None = None,
                     phase: str = "collect") -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Attack-free run yielding ``n_train_slots`` samples for each agent.

    Without ``t_model`` the transmitter follows the genie rule; with one it
    transmits on its classifier's decisions.
    """
    policy = TransmitPolicy.GENIE if t_model is None else TransmitPolicy.CLASSIFIER
    state = new_state(scenario, seed, phase, t_model=t_model, t_policy=policy)
    for _ in range(scenario.n_train_slots + scenario.window_len - 1):
        run_slot(state)
    return state.t_samples, state.a_samples


def split_samples(samples: Sequence[LabeledSample], split: Split):
    """Chronological split into (train, validation, test)."""
    n = len(samples)
    half = n // 2
    if Split(split) is Split.TWO_WAY:
        return samples[:half], samples[half:], samples[half:]
    q3 = half + (n - half) // 2
    return samples[:half], samples[half:q3], samples[q3:]


@dataclass
class TrainedAgent:
    model: MlpClassifier
    test_counts: dict
    loss_curve: list


def train_agent(scenario: Scenario, samples: Sequence[LabeledSample], seed: int,
                who: str) -> TrainedAgent:
    train_set, val_set, test_set = split_samples(samples, scenario.split)
    model = neural.init(scenario.architecture, derived_int(seed, f"init_{who}"),
                        scenario.feature_transform)
    cfg = TrainConfig(scenario.batch_size, scenario.train_steps, scenario.learning_rate,
                      derived_int(seed, f"train_{who}"))
    curve: list = []
    model = neural.train(model, train_set, cfg, loss_log=curve)
    model.decision_threshold = neural.tune_threshold(model, val_set)
    return TrainedAgent(model, neural.error_counts(model, test_set), curve)


@dataclass
class TrainedPair:
    transmitter: TrainedAgent
    adversary: TrainedAgent


def train_agents(scenario: Scenario, seed: int) -> TrainedPair:
    t_samples, a_samples = collect_training(scenario, seed)
    t_agent = train_agent(scenario, t_samples, seed, "T")
    if scenario.collection is Collection.TWO_PHASE:
        _, a_samples = collect_training(scenario, seed, t_agent.model, phase="collect_a")
    a_agent = train_agent(scenario, a_samples, seed, "A")
    return TrainedPair(t_agent, a_agent)


def run_eval(scenario: Scenario, seed: int, t_model: MlpClassifier, a_model: MlpClassifier,
             mode: AttackMode | str, t_policy: TransmitPolicy = TransmitPolicy.CLASSIFIER
             ) -> list[SlotRecord]:
    """``n_eval_slots`` recorded slots after a silent window warm-up.

    The eval streams depend only on ``seed``, so calls with different modes
    form a paired replay.
    """
    state = new_state(scenario, seed, "eval", t_model=t_model, a_model=a_model,
                      mode=AttackMode(mode), t_policy=t_policy)
    state.decisions = False
    for _ in range(scenario.window_len - 1):
        run_slot(state)
    state.decisions = True
    state.slot = 0
    return [run_slot(state) for _ in range(scenario.n_eval_slots)]


def energy_ledger(records: Iterable[SlotRecord], scenario: Scenario, mode: AttackMode | str) -> float:
    """Adversary energy: attacked slots times power times the attacked fraction of a slot."""
    mode = AttackMode(mode)
    if mode is AttackMode.NONE:
        return 0.0
    frac = scenario.sensing_fraction if mode is AttackMode.POISON else scenario.data_fraction
    k = sum(1 for r in records if r.a_attack)
    return k * scenario.power_A * frac


def records_to_csv(records: Iterable[SlotRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = asdict(r)
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_from_csv(text: str) -> list[SlotRecord]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(CSV_COLUMNS) - set(reader.fieldnames or [])
    if missing:
        raise ValueError(f"trace is missing columns: {sorted(missing)}")
    out = []
    for row in reader:
        out.append(SlotRecord(
            slot=int(row["slot"]),
            b_busy=row["b_busy"] == "1",
            p_T=float(row["p_T"]),
            p_A=float(row["p_A"]),
            t_transmit=row["t_transmit"] == "1",
            a_attack=row["a_attack"] == "1",
            sinr_at_R=float(row["sinr_at_R"]) if row["sinr_at_R"] else None,
            success=row["success"] == "1",
            energy_A=float(row["energy_A"]),
        ))
    return out
