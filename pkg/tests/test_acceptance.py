"""One test per acceptance criterion; each records a PASS/FAIL summary line."""

import math
import statistics

import numpy as np

import conftest
from poisonsim import cli, gradcheck, neural
from poisonsim.simulation import TransmitPolicy, run_eval
from poisonsim.traffic import BackgroundSource
from test_neural import brute_force_threshold, fd_grad, max_rel_err, oracle_loss, random_model


def record(n, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {name}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def mean_of(results, mode, field):
    return statistics.fmean(getattr(r.reports[mode], field) for r in results)


def test_c1_baseline_transmitter_quality(default_runs):
    _, results, elapsed = default_runs
    m = {k: mean_of(results, "baseline", k) for k in ("e_MD", "e_FA", "t", "s", "a")}
    ok = (m["e_FA"] <= 0.02 and m["e_MD"] <= 0.02 and m["t"] >= 0.95 and m["s"] >= 0.93
          and 0.15 <= m["a"] <= 0.25 and elapsed < 60)
    detail = ", ".join(f"{k}={100 * v:.2f}%" for k, v in m.items()) + f", runtime={elapsed:.1f}s"
    record(1, "baseline transmitter", ok, detail)


def test_c2_adversary_classifier_quality(default_runs):
    _, results, _ = default_runs
    fa = mean_of(results, "baseline", "adv_e_FA")
    md = mean_of(results, "baseline", "adv_e_MD")
    record(2, "adversary classifier", fa <= 0.06 and md <= 0.08,
           f"adv_e_FA={100 * fa:.2f}%, adv_e_MD={100 * md:.2f}%")


def test_c3_attack_impact(default_runs):
    _, results, _ = default_runs
    t = mean_of(results, "poison", "t")
    a = mean_of(results, "poison", "a")
    factor = mean_of(results, "baseline", "t") / t if t > 0 else math.inf
    per_seed = " ".join(f"{100 * r.reports['poison'].t:.1f}" for r in results)
    record(3, "poison impact", t <= 0.10 and a <= 0.03 and factor >= 10,
           f"t={100 * t:.2f}%, a={100 * a:.2f}%, factor={factor:.1f}x (per-seed t%: {per_seed})")


def test_c4_energy_ratio(default_runs):
    sc, results, _ = default_runs
    ratio = sc.sensing_fraction / sc.data_fraction
    bad = []
    for r in results:
        p, j = r.traces["poison"], r.traces["jam"]
        same = [x.a_attack for x in p] == [x.a_attack for x in j]
        e_p, e_j = r.reports["poison"].adversary_energy, r.reports["jam"].adversary_energy
        if not same or e_p != ratio * e_j:
            bad.append(r.seed)
    attacks = sum(r.reports["poison"].attacks for r in results)
    record(4, "energy ledger", not bad and ratio == 0.125,
           f"ratio={ratio}, {attacks} paired attacks, mismatched seeds={bad}")


def test_c5_poison_purity(default_runs):
    sc, results, _ = default_runs
    violations = checked = 0
    for r in results:
        t_model, a_model = r.pair.transmitter.model, r.pair.adversary.model
        probe = run_eval(sc, r.seed, t_model, a_model, "none", t_policy=TransmitPolicy.ALWAYS)
        base = r.traces["baseline"]
        for i, slot in enumerate(r.traces["poison"]):
            if not slot.t_transmit:
                continue
            checked += 1
            ref = base[i] if base[i].t_transmit else probe[i]
            if slot.success != ref.success or slot.sinr_at_R != ref.sinr_at_R:
                violations += 1
    n_slots = sum(len(r.traces["poison"]) for r in results)
    record(5, "poison purity", violations == 0,
           f"{violations} violations, {checked} poisoned-run transmissions over {n_slots} slots")


def test_c6_neural_properties():
    grad_err = 0.0
    loss_err = 0.0
    for seed in range(5):
        m, batch = random_model(seed)
        grad_err = max(grad_err, max_rel_err(neural.grad(m, batch), fd_grad(m, batch)))
        loss_err = max(loss_err, abs(neural.loss(m, batch) - oracle_loss(m, *batch)))
    gc = gradcheck.run(n_models=5)

    rng = np.random.default_rng(123)
    soft = 0.0
    for seed in range(5):
        m, _ = random_model(seed)
        X = np.abs(rng.normal(0, 50, size=(200, 10)))
        soft = max(soft, float(np.abs(neural.forward(m, X).sum(axis=1) - 1).max()))

    zero, _ = random_model(0)
    for w, b in zip(zero.weights, zero.biases):
        w[:] = 0
        b[:] = 0
    uniform = abs(neural.loss(zero, (rng.normal(size=(8, 10)), rng.integers(0, 2, 8))) - math.log(2))

    matches = 0
    for seed in range(20):
        r = np.random.default_rng(1000 + seed)
        n = int(r.integers(4, 80))
        labels = r.integers(0, 2, size=n)
        labels[:2] = [0, 1]
        scores = np.clip(r.normal(0.4 + 0.2 * labels, 0.25), 0, 1).round(int(r.integers(1, 5)))
        matches += neural.best_threshold(scores, labels) == brute_force_threshold(list(scores), list(labels))

    ok = (grad_err < 1e-4 and gc.passed and soft < 1e-9 and uniform < 1e-9
          and matches == 20 and loss_err < 1e-9)
    record(6, "neural properties", ok,
           f"grad rel err={max(grad_err, gc.max_rel_error):.2e}, |sum-1|={soft:.1e}, "
           f"|L-ln2|={uniform:.1e}, thresholds {matches}/20 exact")


def test_c7_traffic_oracle():
    src = BackgroundSource(arrival_rate=0.8)
    rng = np.random.default_rng(2024)
    busy = 0
    min_queue = 0
    for _ in range(100_000):
        busy += src.step(rng)
        min_queue = min(min_queue, src.queue_len)
    frac = busy / 100_000
    record(7, "traffic oracle", abs(frac - 0.8) <= 0.02 and min_queue >= 0,
           f"busy fraction={frac:.4f}, min queue={min_queue}")


def test_c8_cli_determinism(tmp_path):
    cfg = tmp_path / "det.cfg"
    cfg.write_text("n_train_slots = 300\nn_eval_slots = 200\nhidden_width = 20\ntrain_steps = 200\n"
                   "modes = baseline, poison, jam\nbase_seed = 7\n")
    for d in ("first", "second"):
        assert cli.main(["run", "-c", str(cfg), "-o", str(tmp_path / d)]) == 0
    names = sorted(p.name for p in (tmp_path / "first").glob("*_trace.csv"))
    same = [(tmp_path / "first" / n).read_bytes() == (tmp_path / "second" / n).read_bytes()
            for n in names]
    record(8, "determinism", len(names) == 3 and all(same),
           f"{sum(same)}/{len(names)} trace CSVs byte-identical")
