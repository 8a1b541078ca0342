import pytest

from isingtsp.costmodel import MACRO_COST_TABLE, estimate, macro_cost
from isingtsp.solver import LevelTrace, SolveTrace


def trace_of(*levels):
    t = SolveTrace()
    for i, ups in enumerate(levels):
        t.levels.append(LevelTrace(i, len(ups), sum(u > 0 for u in ups), list(ups), [u // 10 for u in ups]))
    return t


def test_table_values():
    assert [MACRO_COST_TABLE[b].iteration_ns for b in (2, 3, 4)] == [9, 9, 9]
    assert [MACRO_COST_TABLE[b].energy_per_iter_pj for b in (2, 3, 4)] == [37.82, 45.3, 45.98]
    assert [MACRO_COST_TABLE[b].power_mw for b in (2, 3, 4)] == [4.202, 5.033, 5.11]
    assert [(MACRO_COST_TABLE[b].array_rows, MACRO_COST_TABLE[b].array_cols) for b in (2, 3, 4)] == [
        (12, 36),
        (12, 48),
        (12, 60),
    ]


def test_energy_grows_with_precision():
    e = [MACRO_COST_TABLE[b].energy_per_iter_pj for b in (2, 3, 4)]
    assert e == sorted(e)


def test_single_twelve_city_cluster():
    report = estimate(trace_of([13400]), 4, 1)
    assert report.order_updates == 13400
    assert report.macro_latency_ns == pytest.approx(120_600)
    assert report.macro_energy_pj / 1e6 == pytest.approx(0.616, abs=5e-4)


def test_empty_trace_costs_nothing():
    report = estimate(SolveTrace(), 4, 8)
    assert report.macro_latency_ns == 0 and report.macro_energy_pj == 0


def test_batches_follow_macro_count():
    t = trace_of([100] * 8)
    one = estimate(t, 3, 4).macro_latency_ns
    two = estimate(t, 3, 8).macro_latency_ns
    assert one == pytest.approx(2 * two)
    assert estimate(t, 3, 3).levels[0].batches == 3


def test_additive_over_levels_and_order_free():
    a = estimate(trace_of([10, 20], [30]), 2, 1)
    b = estimate(trace_of([30], [20, 10]), 2, 1)
    assert a.macro_energy_pj == pytest.approx(b.macro_energy_pj)
    assert a.macro_latency_ns == pytest.approx(b.macro_latency_ns)
    assert a.macro_energy_pj == pytest.approx(60 * 37.82)


def test_unmodeled_line_and_host_times():
    t = trace_of([10])
    t.phase_times["clustering"] = 0.5
    report = estimate(t, 4, 1)
    assert "mapping" in report.unmodeled
    assert report.host_times_s["clustering"] == 0.5
    assert "annealing" not in report.host_times_s
    assert "host_times_s" not in report.to_dict(include_host=False)


def test_bad_arguments():
    with pytest.raises(ValueError):
        macro_cost(5)
    with pytest.raises(ValueError):
        estimate(SolveTrace(), 4, 0)
