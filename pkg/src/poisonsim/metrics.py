"""Confusion counts, throughput ratios and the with/without-attack table.

Ratios whose denominator is zero are ``None`` ("undefined") rather than 0 or
NaN; an attacked run can legitimately make no transmissions at all.
"""

from __future__ import annotations

import math
import statistics
from decimal import ROUND_HALF_UP, Decimal
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

Ratio = Optional[float]
UNDEFINED = "undefined"


@dataclass(frozen=True)
class ConfusionCounts:
    """Misses and false alarms against their class totals.

    For the transmitter the positive class is "busy"; for the adversary it
    is "ACK" (a successful transmission).
    """

    n_MD: int
    n_FA: int
    n_busy: int
    n_idle: int

    def __post_init__(self):
        if min(self.n_MD, self.n_FA, self.n_busy, self.n_idle) < 0:
            raise ValueError("counts must be nonnegative")
        if self.n_MD > self.n_busy or self.n_FA > self.n_idle:
            raise ValueError("more errors than samples of that class")

    @classmethod
    def from_error_counts(cls, d: dict) -> "ConfusionCounts":
        """Build from :func:`poisonsim.neural.error_counts` output."""
        return cls(d["pos_missed"], d["neg_flagged"], d["n_pos"], d["n_neg"])


def ratio(num: int, den: int) -> Ratio:
    return num / den if den > 0 else None


def error_rates(c: ConfusionCounts) -> tuple[Ratio, Ratio]:
    """``(e_MD, e_FA)``: busy called idle, idle called busy."""
    return ratio(c.n_MD, c.n_busy), ratio(c.n_FA, c.n_idle)


def adversary_error_rates(c: ConfusionCounts) -> tuple[Ratio, Ratio]:
    """``(e_MD, e_FA)`` in the ACK domain.

    A miss is a success predicted as a failure; a false alarm is a failure
    predicted as a success. The arithmetic is the transmitter's.
    """
    return error_rates(c)


@dataclass(frozen=True)
class Throughput:
    t: Ratio
    s: Ratio
    a: Ratio
    successes: int
    transmissions: int
    idle_slots: int
    total_slots: int


def throughput_ratios(records: Sequence) -> Throughput:
    """Normalized throughput, success ratio and all-transmission ratio.

    ``t`` divides successes by truly idle slots (an ideal detector's
    opportunities), ``s`` by attempted transmissions, ``a`` is attempts per slot.
    """
    if len(records) == 0:
        raise ValueError("no slot records")
    successes = sum(1 for r in records if r.success)
    transmissions = sum(1 for r in records if r.t_transmit)
    idle = sum(1 for r in records if not r.b_busy)
    n = len(records)
    return Throughput(ratio(successes, idle), ratio(successes, transmissions),
                      ratio(transmissions, n), successes, transmissions, idle, n)


def runtime_confusion(records: Sequence) -> ConfusionCounts:
    """Transmitter decisions against ground truth over an evaluation trace.

    Transmitting on a busy slot is a misdetection; staying silent on an idle
    slot is a false alarm (poisoned slots count here).
    """
    n_busy = sum(1 for r in records if r.b_busy)
    n_md = sum(1 for r in records if r.b_busy and r.t_transmit)
    n_fa = sum(1 for r in records if not r.b_busy and not r.t_transmit)
    return ConfusionCounts(n_md, n_fa, n_busy, len(records) - n_busy)


@dataclass
class MetricsReport:
    mode: str
    e_MD: Ratio
    e_FA: Ratio
    adv_e_MD: Ratio
    adv_e_FA: Ratio
    t: Ratio
    s: Ratio
    a: Ratio
    successes: int
    transmissions: int
    idle_slots: int
    total_slots: int
    attacks: int
    adversary_energy: float
    runtime_e_MD: Ratio = None
    runtime_e_FA: Ratio = None
    t_counts: dict = field(default_factory=dict)
    a_counts: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in RATIO_FIELDS:
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if not self.successes <= self.transmissions <= self.total_slots:
            raise ValueError("need successes <= transmissions <= total slots")

    def to_dict(self) -> dict:
        return asdict(self)


RATIO_FIELDS = ("e_MD", "e_FA", "adv_e_MD", "adv_e_FA", "t", "s", "a",
                "runtime_e_MD", "runtime_e_FA")


def build_report(mode: str, records: Sequence, t_counts: ConfusionCounts,
                 a_counts: ConfusionCounts, adversary_energy: float) -> MetricsReport:
    e_md, e_fa = error_rates(t_counts)
    ae_md, ae_fa = adversary_error_rates(a_counts)
    th = throughput_ratios(records)
    rt_md, rt_fa = error_rates(runtime_confusion(records))
    return MetricsReport(
        mode=mode, e_MD=e_md, e_FA=e_fa, adv_e_MD=ae_md, adv_e_FA=ae_fa,
        t=th.t, s=th.s, a=th.a, successes=th.successes, transmissions=th.transmissions,
        idle_slots=th.idle_slots, total_slots=th.total_slots,
        attacks=sum(1 for r in records if r.a_attack), adversary_energy=adversary_energy,
        runtime_e_MD=rt_md, runtime_e_FA=rt_fa,
        t_counts=asdict(t_counts), a_counts=asdict(a_counts))


def pct(v: Ratio) -> str:
    """Percentage with two decimals, halves rounded up (3.125 -> 3.13)."""
    if v is None:
        return UNDEFINED
    d = (Decimal(repr(float(v))) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{d}%"


def _factor(before: Ratio, after: Ratio) -> Ratio:
    if before is None or after is None or after == 0:
        return None
    return before / after


@dataclass(frozen=True)
class Comparison:
    rows: tuple
    throughput_reduction: Ratio
    success_reduction: Ratio
    transmission_reduction: Ratio
    energy: tuple

    def to_dict(self) -> dict:
        return asdict(self)


def compare(baseline: MetricsReport, attacked: MetricsReport) -> Comparison:
    """Two-row (t, s, a) table plus baseline/attacked reduction factors."""
    rows = (
        (baseline.mode, baseline.t, baseline.s, baseline.a),
        (attacked.mode, attacked.t, attacked.s, attacked.a),
    )
    return Comparison(rows,
                      _factor(baseline.t, attacked.t),
                      _factor(baseline.s, attacked.s),
                      _factor(baseline.a, attacked.a),
                      (baseline.adversary_energy, attacked.adversary_energy))


def render_comparison(rows: Iterable[tuple], title: str = "Results with and without attack") -> str:
    header = ("", "Normalized throughput t", "Success ratio s", "All transmission ratio a")
    body = [(str(r[0]),) + tuple(pct(v) for v in r[1:]) for r in rows]
    widths = [max(len(line[i]) for line in [header] + body) for i in range(4)]
    fmt = lambda line: " | ".join(c.rjust(w) if i else c.ljust(w)
                                  for i, (c, w) in enumerate(zip(line, widths)))
    rule = "-+-".join("-" * w for w in widths)
    return "\n".join([title, fmt(header), rule] + [fmt(b) for b in body])


@dataclass(frozen=True)
class Summary:
    mean: Ratio
    std: Ratio
    n: int


def summarize(values: Iterable[Ratio]) -> Summary:
    """Mean and sample std over the defined values."""
    vals = [v for v in values if v is not None]
    if not vals:
        return Summary(None, None, 0)
    std = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return Summary(statistics.fmean(vals), std, len(vals))


AGGREGATE_FIELDS = RATIO_FIELDS + ("adversary_energy",)


def aggregate(reports: Sequence[MetricsReport]) -> dict[str, Summary]:
    return {name: summarize(getattr(r, name) for r in reports) for name in AGGREGATE_FIELDS}


def render_aggregate(by_mode: dict[str, dict[str, Summary]]) -> str:
    lines = []
    for mode, summ in by_mode.items():
        parts = []
        for name in ("t", "s", "a", "e_MD", "e_FA", "adv_e_MD", "adv_e_FA"):
            sm = summ[name]
            if sm.mean is None:
                parts.append(f"{name}={UNDEFINED}")
            else:
                parts.append(f"{name}={100 * sm.mean:.2f}±{100 * sm.std:.2f}%")
        e = summ["adversary_energy"]
        parts.append(f"energy={e.mean:.1f}±{e.std:.1f}" if e.mean is not None else "energy=0")
        lines.append(f"{mode:<9} " + "  ".join(parts) + f"  (n={summ['t'].n})")
    return "\n".join(lines)


def is_finite_ratio(v: Ratio) -> bool:
    return v is not None and math.isfinite(v)
