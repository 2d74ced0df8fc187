import math

import pytest

from scanforge import costs
from scanforge.ops import ScanKind
from scanforge.simulate import (Constant, CostModel, LogNormal, SimReport,
                                SimulationError, Trace, Uniform, simulate)
from scanforge.strategy import StrategyVariant

K = ScanKind
V = StrategyVariant

GRID = [(8, 2), (8, 8), (16, 4), (64, 8), (64, 16), (128, 128), (256, 32),
        (512, 512), (1024, 64), (2048, 2), (4096, 256), (4096, 512)]


def test_constant_cost_makespan_equals_total_span_everywhere():
    for variant in V:
        for kind in K:
            for n, p in GRID:
                fig = costs.distributed_span(kind, n, p, variant)
                rep = simulate(variant, kind, n, p, CostModel(Constant(1.0)))
                assert rep.makespan == float(fig.total_span), \
                    (variant, kind, n, p, rep.makespan, fig.total_span)


def test_makespan_scales_with_the_constant():
    fig = costs.distributed_span(K.BLELLOCH, 64, 8, V.GENERAL_EXCLUSIVE)
    rep = simulate(V.GENERAL_EXCLUSIVE, K.BLELLOCH, 64, 8,
                   CostModel(Constant(0.5)))
    assert rep.makespan == fig.total_span * 0.5


def test_application_totals_match_work_formulas():
    for variant in (V.GENERAL_EXCLUSIVE, V.GENERAL_INCLUSIVE, V.ALTERNATIVE):
        for kind in K:
            for n, p in [(8, 2), (64, 8), (256, 32), (512, 512)]:
                rep = simulate(variant, kind, n, p, CostModel(Constant(1.0)))
                assert rep.total_applications == \
                    costs.distributed_work(kind, n, p, variant), \
                    (variant, kind, n, p)


def test_worker_zero_is_idle_in_stage_two():
    rep = simulate(V.GENERAL_EXCLUSIVE, K.BLELLOCH, 64, 8,
                   CostModel(Constant(1.0)))
    assert rep.stage_applications[0]["local2"] == 0
    for w in range(1, 8):
        assert rep.stage_applications[w]["local2"] == 8


def test_alternative_stage_counts():
    n, p = 64, 8
    rep = simulate(V.ALTERNATIVE, K.KOGGE_STONE, n, p, CostModel(Constant(1.0)))
    for w in range(p):
        assert rep.stage_applications[w]["local1"] == n // p - 1
        assert rep.stage_applications[w]["local2"] == n // p + 1


def test_determinism():
    model = CostModel(LogNormal(0.0, 0.75), message_latency=0.1, seed=42)
    a = simulate(V.GENERAL_INCLUSIVE, K.KOGGE_STONE, 128, 16, model)
    b = simulate(V.GENERAL_INCLUSIVE, K.KOGGE_STONE, 128, 16, model)
    assert a.makespan == b.makespan
    assert a.timelines == b.timelines
    assert a.idle == b.idle


def test_lognormal_degrades_vs_constant_prediction():
    mu, sigma = 0.0, 0.6
    mean_cost = math.exp(mu + sigma * sigma / 2)
    model = CostModel(LogNormal(mu, sigma), seed=42)
    rep = simulate(V.GENERAL_EXCLUSIVE, K.KOGGE_STONE, 128, 16, model)
    fig = costs.distributed_span(K.KOGGE_STONE, 128, 16, V.GENERAL_EXCLUSIVE)
    assert rep.makespan > fig.total_span * mean_cost
    assert any(idle > 0 for idle in rep.idle)


def test_latency_delays_the_global_stage():
    base = simulate(V.GENERAL_EXCLUSIVE, K.SERIAL, 64, 8,
                    CostModel(Constant(1.0)))
    lagged = simulate(V.GENERAL_EXCLUSIVE, K.SERIAL, 64, 8,
                      CostModel(Constant(1.0), message_latency=2.0))
    # the serial chain crosses p-1 links, each adding the full latency
    assert lagged.makespan == base.makespan + 2.0 * 7


def test_trace_model_bootstrap_is_deterministic():
    model = CostModel(Trace((0.5, 1.5, 2.5)), seed=3)
    a = simulate(V.GENERAL_EXCLUSIVE, K.BLELLOCH, 32, 4, model)
    b = simulate(V.GENERAL_EXCLUSIVE, K.BLELLOCH, 32, 4, model)
    assert a.makespan == b.makespan


def test_uniform_seeds_differ():
    m1 = CostModel(Uniform(0.5, 1.5), seed=1)
    m2 = CostModel(Uniform(0.5, 1.5), seed=2)
    a = simulate(V.GENERAL_EXCLUSIVE, K.BLELLOCH, 64, 4, m1)
    b = simulate(V.GENERAL_EXCLUSIVE, K.BLELLOCH, 64, 4, m2)
    assert a.makespan != b.makespan


def test_cost_model_validation():
    with pytest.raises(SimulationError):
        Constant(0.0)
    with pytest.raises(SimulationError):
        Uniform(0.0, 1.0)
    with pytest.raises(SimulationError):
        Uniform(2.0, 1.0)
    with pytest.raises(SimulationError):
        LogNormal(0.0, -1.0)
    with pytest.raises(SimulationError):
        Trace(())
    with pytest.raises(SimulationError):
        Trace((1.0, -2.0))
    with pytest.raises(SimulationError):
        CostModel(Constant(1.0), message_latency=-1.0)


def test_uneven_partition_simulates():
    rep = simulate(V.GENERAL_EXCLUSIVE, K.SERIAL, 10, 4,
                   CostModel(Constant(1.0)))
    assert rep.makespan > 0
    sizes = [sum(c.values()) for c in rep.stage_applications]
    assert sizes[0] == 2    # big chunk, no stage two
    assert sizes[-1] == 1 + 2


def test_timeline_csv_shape():
    rep = simulate(V.GENERAL_EXCLUSIVE, K.BLELLOCH, 16, 4,
                   CostModel(Constant(1.0)))
    lines = rep.timeline_csv().strip().splitlines()
    assert lines[0] == "worker,label,start,end"
    assert len(lines) > 4
    assert rep.makespan == max(float(l.split(",")[-1]) for l in lines[1:])


def test_report_stage_rollup():
    rep = simulate(V.GENERAL_INCLUSIVE, K.SKLANSKY, 64, 8,
                   CostModel(Constant(1.0)))
    by_stage = rep.applications_by_stage()
    assert by_stage["local1"] == 64 - 8
    assert by_stage["global"] == costs.global_work(K.SKLANSKY, 8, "inclusive")
    assert by_stage["local2"] == 7 * 7
    assert isinstance(rep, SimReport)
