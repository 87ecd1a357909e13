"""Replication driver: train both agents, evaluate each mode, write outputs."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import metrics, neural
from .config import RunConfig, attack_mode_for, config_items
from .metrics import ConfusionCounts, MetricsReport
from .simulation import (Scenario, SlotRecord, TrainedPair, energy_ledger, records_to_csv,
                         run_eval, train_agents)

log = logging.getLogger(__name__)


@dataclass
class ReplicationResult:
    seed: int
    pair: TrainedPair
    traces: dict[str, list[SlotRecord]]
    reports: dict[str, MetricsReport]


def run_replication(scenario: Scenario, seed: int, modes=("baseline", "poison")) -> ReplicationResult:
    pair = train_agents(scenario, seed)
    t_counts = ConfusionCounts.from_error_counts(pair.transmitter.test_counts)
    a_counts = ConfusionCounts.from_error_counts(pair.adversary.test_counts)
    traces, reports = {}, {}
    for mode in modes:
        amode = attack_mode_for(mode)
        recs = run_eval(scenario, seed, pair.transmitter.model, pair.adversary.model, amode)
        traces[mode] = recs
        reports[mode] = metrics.build_report(mode, recs, t_counts, a_counts,
                                             energy_ledger(recs, scenario, amode))
        log.info("seed %d %-8s t=%s s=%s a=%s", seed, mode, metrics.pct(reports[mode].t),
                 metrics.pct(reports[mode].s), metrics.pct(reports[mode].a))
    return ReplicationResult(seed, pair, traces, reports)


def _run_one(args):
    scenario, seed, modes = args
    return run_replication(scenario, seed, modes)


def run_experiment(cfg: RunConfig, workers: int = 1) -> list[ReplicationResult]:
    jobs = [(cfg.scenario, seed, cfg.modes) for seed in cfg.seeds()]
    if workers <= 1 or len(jobs) == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def aggregate_by_mode(cfg: RunConfig, results: list[ReplicationResult]) -> dict:
    return {mode: metrics.aggregate([r.reports[mode] for r in results]) for mode in cfg.modes}


def comparison_rows(cfg: RunConfig, results: list[ReplicationResult]) -> list[tuple]:
    """One (mode, t, s, a) row per mode; means when there are several replications."""
    if len(results) == 1:
        rep = results[0].reports
        return [(m, rep[m].t, rep[m].s, rep[m].a) for m in cfg.modes]
    agg = aggregate_by_mode(cfg, results)
    return [(f"{m} (mean)", agg[m]["t"].mean, agg[m]["s"].mean, agg[m]["a"].mean)
            for m in cfg.modes]


def trace_name(seed: int, mode: str) -> str:
    return f"seed{seed:04d}_{mode}_trace.csv"


def write_outputs(cfg: RunConfig, results: list[ReplicationResult], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    echo = dict(config_items(cfg))
    written = []

    def put(name: str, text: str):
        path = out / name
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
        written.append(path)

    for res in results:
        for mode in cfg.modes:
            put(trace_name(res.seed, mode), records_to_csv(res.traces[mode]))
            report = {"config": echo, "seed": res.seed, **res.reports[mode].to_dict()}
            put(f"seed{res.seed:04d}_{mode}_report.json", json.dumps(report, indent=2) + "\n")
        put(f"seed{res.seed:04d}_T_model.json", json.dumps(neural.to_dict(res.pair.transmitter.model)))
        put(f"seed{res.seed:04d}_A_model.json", json.dumps(neural.to_dict(res.pair.adversary.model)))

    agg = aggregate_by_mode(cfg, results)
    agg_doc = {
        "config": echo,
        "seeds": [r.seed for r in results],
        "modes": {m: {k: vars(v) for k, v in s.items()} for m, s in agg.items()},
    }
    if "baseline" in cfg.modes:
        agg_doc["reduction_factors"] = {}
        for m in cfg.modes:
            if m == "baseline":
                continue
            facs = [metrics.compare(r.reports["baseline"], r.reports[m]) for r in results]
            agg_doc["reduction_factors"][m] = {
                "throughput_of_means": _safe_div(agg["baseline"]["t"].mean, agg[m]["t"].mean),
                "throughput": vars(metrics.summarize(f.throughput_reduction for f in facs)),
            }
    put("aggregate.json", json.dumps(agg_doc, indent=2) + "\n")
    if len(cfg.modes) >= 2:
        put("comparison.txt", metrics.render_comparison(comparison_rows(cfg, results)) + "\n")
    return written


def _safe_div(a, b):
    if a is None or b is None or b == 0:
        return None
    return a / b
