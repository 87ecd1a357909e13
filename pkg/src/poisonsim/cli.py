"""Command line: ``poisonsim run | gradcheck | report``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import gradcheck, metrics
from .config import ConfigError, RunConfig, load_config
from .experiment import aggregate_by_mode, comparison_rows, run_experiment, write_outputs
from .simulation import records_from_csv

log = logging.getLogger("poisonsim")


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    kw = {}
    if args.seed is not None:
        kw["base_seed"] = args.seed
    if args.replications is not None:
        kw["replications"] = args.replications
    if args.modes is not None:
        kw["modes"] = tuple(m.strip() for m in args.modes.split(",") if m.strip())
    if args.out is not None:
        kw["output_dir"] = args.out
    return replace(cfg, **kw) if kw else cfg


def cmd_run(args) -> int:
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    results = run_experiment(cfg, workers=args.workers)
    try:
        written = write_outputs(cfg, results, cfg.output_dir)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    log.info("%d replication(s) in %.1f s, %d files under %s", len(results),
             time.perf_counter() - t0, len(written), cfg.output_dir)

    if len(cfg.modes) >= 2:
        print(metrics.render_comparison(comparison_rows(cfg, results)))
    if len(results) > 1:
        print()
        print(metrics.render_aggregate(aggregate_by_mode(cfg, results)))
    return 0


def cmd_gradcheck(args) -> int:
    res = gradcheck.run(n_models=args.models, seed=args.seed or 0, perturb=args.perturb)
    print(f"max relative gradient error: {res.max_rel_error:.3e}")
    print(f"max softmax |sum - 1|:        {res.max_softmax_dev:.3e}")
    print(f"uniform loss |L - ln 2|:      {res.uniform_loss_dev:.3e}")
    print("PASS" if res.passed else "FAIL")
    return 0 if res.passed else 1


def cmd_report(args) -> int:
    try:
        records = records_from_csv(Path(args.trace).read_text())
    except (OSError, ValueError) as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return 1
    th = metrics.throughput_ratios(records)
    md, fa = metrics.error_rates(metrics.runtime_confusion(records))
    summary = {
        "slots": th.total_slots, "idle_slots": th.idle_slots,
        "transmissions": th.transmissions, "successes": th.successes,
        "t": th.t, "s": th.s, "a": th.a,
        "runtime_e_MD": md, "runtime_e_FA": fa,
        "attacks": sum(1 for r in records if r.a_attack),
        "adversary_energy": sum(r.energy_A for r in records),
    }
    if args.json:
        print(json.dumps(summary, indent=2))
        return 0
    print(metrics.render_comparison([(Path(args.trace).stem, th.t, th.s, th.a)],
                                    title=f"{th.total_slots} slots, {th.idle_slots} idle"))
    print(f"transmissions={th.transmissions} successes={th.successes} "
          f"attacks={summary['attacks']} adversary_energy={summary['adversary_energy']:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="poisonsim",
                                description="Spectrum data poisoning attack simulator")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train both agents and evaluate the requested modes")
    run.add_argument("-c", "--config", help="key = value config file (defaults if omitted)")
    run.add_argument("--seed", type=int, help="base seed (overrides config)")
    run.add_argument("--modes", help="comma-separated: baseline,poison,jam")
    run.add_argument("-n", "--replications", type=int)
    run.add_argument("-o", "--out", help="output directory")
    run.add_argument("-j", "--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    gc = sub.add_parser("gradcheck", help="finite-difference self-test of the network")
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--models", type=int, default=5)
    gc.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    gc.set_defaults(func=cmd_gradcheck)

    rep = sub.add_parser("report", help="re-render metrics from a saved trace CSV")
    rep.add_argument("trace")
    rep.add_argument("--json", action="store_true")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
