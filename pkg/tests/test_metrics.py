import random
import statistics

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poisonsim import metrics
from poisonsim.metrics import ConfusionCounts
from poisonsim.simulation import SlotRecord


def rec(i, busy, tx, ok):
    return SlotRecord(i, busy, 1.0, 1.0, tx, False, (5.0 if ok else 1.0) if tx else None, ok, 0.0)


def reference_baseline():
    out = []
    out += [("idle", True, True)] * 95 + [("idle", True, False)]
    out += [("busy", True, False)] * 2 + [("busy", False, False)] * 402
    return [rec(i, kind == "busy", tx, ok) for i, (kind, tx, ok) in enumerate(out)]


def reference_attacked():
    out = [("idle", True, True)] * 3 + [("idle", False, False)] * 93
    out += [("busy", True, False)] + [("busy", False, False)] * 403
    return [rec(i, kind == "busy", tx, ok) for i, (kind, tx, ok) in enumerate(out)]


def test_error_rates_reference_values():
    md, fa = metrics.error_rates(ConfusionCounts(3, 0, 403, 97))
    assert metrics.pct(md) == "0.74%" and md == 3 / 403
    assert metrics.pct(fa) == "0.00%"
    assert metrics.error_rates(ConfusionCounts(0, 0, 5, 5)) == (0.0, 0.0)


def test_adversary_error_rates_reference_values():
    md, fa = metrics.adversary_error_rates(ConfusionCounts(n_MD=4, n_FA=8, n_busy=95, n_idle=405))
    assert metrics.pct(fa) == "1.98%"
    assert metrics.pct(md) == "4.21%"
    assert metrics.adversary_error_rates(ConfusionCounts(0, 0, 1, 1)) == (0.0, 0.0)


def test_zero_denominator_is_undefined():
    assert metrics.error_rates(ConfusionCounts(0, 0, 0, 4)) == (None, 0.0)
    assert metrics.pct(None) == "undefined"


def test_confusion_validation():
    with pytest.raises(ValueError):
        ConfusionCounts(5, 0, 4, 10)


def test_throughput_reference_baseline():
    th = metrics.throughput_ratios(reference_baseline())
    assert (th.successes, th.idle_slots, th.transmissions, th.total_slots) == (95, 96, 98, 500)
    assert [metrics.pct(v) for v in (th.t, th.s, th.a)] == ["98.96%", "96.94%", "19.60%"]


def test_throughput_reference_attacked():
    th = metrics.throughput_ratios(reference_attacked())
    assert [metrics.pct(v) for v in (th.t, th.s, th.a)] == ["3.13%", "75.00%", "0.80%"]


def test_throughput_no_transmissions():
    th = metrics.throughput_ratios([rec(i, i % 2 == 0, False, False) for i in range(10)])
    assert th.a == 0 and th.t == 0 and th.s is None


def test_throughput_empty():
    with pytest.raises(ValueError):
        metrics.throughput_ratios([])


def _report(mode, recs, energy=0.0):
    c = ConfusionCounts(0, 0, 10, 10)
    return metrics.build_report(mode, recs, c, c, energy)


def test_compare_reference_table():
    cmp = metrics.compare(_report("no attack", reference_baseline()),
                          _report("with attack", reference_attacked(), 400.0))
    rows = [[metrics.pct(v) for v in row[1:]] for row in cmp.rows]
    assert rows == [["98.96%", "96.94%", "19.60%"], ["3.13%", "75.00%", "0.80%"]]
    assert cmp.throughput_reduction == pytest.approx(31.67, abs=0.01)
    assert 0.9896 / 0.0313 == pytest.approx(31.6, abs=0.05)
    assert cmp.energy == (0.0, 400.0)
    table = metrics.render_comparison(cmp.rows)
    assert "98.96%" in table and "75.00%" in table


def test_compare_identical_reports():
    r = _report("x", reference_baseline())
    cmp = metrics.compare(r, r)
    assert cmp.throughput_reduction == cmp.success_reduction == cmp.transmission_reduction == 1


def test_runtime_confusion():
    c = metrics.runtime_confusion(reference_baseline())
    assert (c.n_MD, c.n_FA, c.n_busy, c.n_idle) == (2, 0, 404, 96)


records_strategy = st.lists(
    st.tuples(st.booleans(), st.booleans(), st.booleans()).map(
        lambda t: (t[0], t[1], t[1] and t[2] and not t[0])), min_size=1, max_size=80)


@given(records_strategy, st.randoms())
def test_ratios_properties(rows, rnd):
    recs = [rec(i, *r) for i, r in enumerate(rows)]
    th = metrics.throughput_ratios(recs)
    for v in (th.t, th.s, th.a):
        assert v is None or 0 <= v <= 1
    # independent counting pass
    n_ok = sum(1 for b, tx, ok in rows if ok)
    n_tx = sum(1 for b, tx, ok in rows if tx)
    n_idle = sum(1 for b, tx, ok in rows if not b)
    assert (th.successes, th.transmissions, th.idle_slots) == (n_ok, n_tx, n_idle)
    if th.t is not None:
        assert th.t * n_idle == pytest.approx(n_ok)
    if th.s is not None:
        assert th.s * n_tx == pytest.approx(n_ok)
    shuffled = recs[:]
    rnd.shuffle(shuffled)
    assert metrics.throughput_ratios(shuffled) == th
    assert metrics.runtime_confusion(shuffled) == metrics.runtime_confusion(recs)


def test_busy_success_cannot_push_t_over_one():
    recs = [rec(0, True, True, True), rec(1, False, False, False)]
    with pytest.raises(ValueError):
        metrics.build_report("x", [rec(0, True, True, True), rec(1, True, True, True),
                                   rec(2, False, False, False)],
                             ConfusionCounts(0, 0, 1, 1), ConfusionCounts(0, 0, 1, 1), 0.0)
    assert metrics.throughput_ratios(recs).t == 1.0


def test_aggregate_matches_oracle():
    rng = random.Random(4)
    reports = []
    for _ in range(10):
        n_idle = rng.randint(80, 110)
        ok = rng.randint(70, n_idle)
        rows = [("i", True, True)] * ok + [("i", False, False)] * (n_idle - ok) + [("b", False, False)] * 300
        reports.append(_report("b", [rec(i, k == "b", tx, s) for i, (k, tx, s) in enumerate(rows)]))
    agg = metrics.aggregate(reports)
    ts = [r.t for r in reports]
    assert agg["t"].mean == pytest.approx(np.mean(ts), rel=1e-12)
    assert agg["t"].std == pytest.approx(np.std(ts, ddof=1), rel=1e-12)
    assert agg["t"].n == 10
    assert agg["s"].mean == 1.0


def test_summarize_skips_undefined():
    s = metrics.summarize([None, 0.5, None, 0.7])
    assert s.n == 2 and s.mean == pytest.approx(0.6)
    assert s.std == pytest.approx(statistics.stdev([0.5, 0.7]))
    assert metrics.summarize([None]).mean is None
