"""Outer loop: stop reasons, cut management, reports."""

import json
import math

import numpy as np
import pytest

from gpbound.bounds import enumerate_optimum
from gpbound.driver import (FEW_NEW_CUTS, GAP_CLOSED, MAX_OUTER_LOOPS,
                            SMALL_IMPROVEMENT, TIME_LIMIT, BoundReport,
                            SolveConfig, solve)
from gpbound.graph import PartitionSpec, gen_gnp_degree, gen_spinglass


def _easy():
    return gen_gnp_degree(6, 3.0, 0), PartitionSpec.equipartition(6, 2)


def _glassy(nr=3, k=3):
    g = gen_spinglass(2, nr, 0.5, 1)
    return g, PartitionSpec.equipartition(g.n, k)


def test_easy_instance_closes_at_the_root():
    g, spec = _easy()
    r = solve(g, spec)
    assert r.stop_reason == GAP_CLOSED
    assert r.ub == 2.0
    assert r.lb_rounded == 2
    assert r.outer_loops == 1
    assert r.cuts_total == 0


def test_zero_outer_loops_means_no_cuts():
    g, spec = _glassy()
    r = solve(g, spec, SolveConfig(max_outer_loops=0, ub=1e9))
    assert r.cuts_total == 0
    assert len(r.records) == 1
    assert r.records[0].cuts_added == 0
    assert r.stop_reason in (GAP_CLOSED, FEW_NEW_CUTS, MAX_OUTER_LOOPS)


def test_zero_time_budget_still_certifies():
    g, spec = _easy()
    r = solve(g, spec, SolveConfig(max_time=0.0))
    assert r.stop_reason == TIME_LIMIT
    assert r.records[0].inner_iterations == 0
    assert math.isfinite(r.lb)
    opt, _ = enumerate_optimum(g, spec)
    assert r.lb_rounded <= opt


def test_cut_rounds_close_spinglass_gap():
    g = gen_spinglass(2, 4, 0.5, 1)
    spec = PartitionSpec.equipartition(16, 2)
    opt, _ = enumerate_optimum(g, spec)
    r = solve(g, spec)
    assert r.stop_reason == GAP_CLOSED
    assert r.lb_rounded == opt == -10
    assert r.outer_loops == 2
    assert r.cuts_total > 0


def test_records_are_consistent():
    g, spec = _glassy()
    r = solve(g, spec, SolveConfig(ub=1e9))
    recs = r.records
    assert [rec.outer for rec in recs] == list(range(len(recs)))
    running = -math.inf
    total = 0
    for rec in recs:
        running = max(running, rec.lb)
        assert rec.lb_best == pytest.approx(running)
        assert rec.cuts_total == total
        total += rec.cuts_added
    assert r.cuts_total == total
    assert r.lb == pytest.approx(running)
    assert r.total_inner_iterations == sum(rec.inner_iterations
                                           for rec in recs)
    assert recs[0].eps_admm == 1e-3


def test_small_improvement_stop():
    g, spec = _glassy()
    r = solve(g, spec, SolveConfig(ub=1e9))
    assert r.stop_reason == SMALL_IMPROVEMENT
    assert r.outer_loops >= 2
    assert r.cuts_total > 0


def test_few_new_cuts_stop():
    g, spec = _glassy()
    r = solve(g, spec, SolveConfig(ub=1e9, tol_sep=1e9))
    assert r.stop_reason == FEW_NEW_CUTS
    assert r.outer_loops == 1
    assert r.cuts_total == 0


def test_max_outer_loops_stop():
    # needs an instance where round two still finds plenty of cuts,
    # otherwise FewNewCuts wins (it is checked first)
    g, spec = _glassy(nr=4, k=2)
    r = solve(g, spec, SolveConfig(ub=1e9, max_outer_loops=1,
                                   small_improvement_tol=-1e18))
    assert r.stop_reason == MAX_OUTER_LOOPS
    assert r.outer_loops == 2
    assert r.records[-1].cuts_added == 0


def test_num_cuts_caps_additions():
    g, spec = _glassy()
    r = solve(g, spec, SolveConfig(ub=1e9, num_cuts=2))
    for rec in r.records:
        assert rec.cuts_added <= 2


def test_explicit_upper_bound_is_used():
    g, spec = _easy()
    r = solve(g, spec, SolveConfig(ub=123.0, max_outer_loops=0))
    assert r.ub == 123.0


def test_signature_reproducible_and_time_free():
    g, spec = _glassy()
    a = solve(g, spec, SolveConfig(ub=1e9))
    b = solve(g, spec, SolveConfig(ub=1e9))
    assert a.signature() == b.signature()
    a.wall_time = 999.0
    assert a.signature() == b.signature()
    assert a.to_dict()["wall_time"] == 999.0


def test_jsonl_round_trip(tmp_path):
    g, spec = _glassy()
    r = solve(g, spec, SolveConfig(ub=1e9))
    path = tmp_path / "run.jsonl"
    r.write_jsonl(path)
    lines = [json.loads(s) for s in path.read_text().splitlines()]
    outer = [d for d in lines if d["type"] == "outer"]
    summary = [d for d in lines if d["type"] == "summary"]
    assert len(outer) == r.outer_loops
    assert len(summary) == 1
    assert summary[0]["stop_reason"] == r.stop_reason
    assert summary[0]["lb"] == pytest.approx(r.lb)
    assert "records" not in summary[0]
    assert outer[0]["lb"] == pytest.approx(r.records[0].lb)


def test_bisection_solve_report():
    g = gen_spinglass(2, 3, 0.5, 1)
    spec = PartitionSpec.bisection(5, 4)
    opt, _ = enumerate_optimum(g, spec)
    r = solve(g, spec)
    assert r.problem == "BP"
    assert r.m == (5, 4)
    assert r.lb_rounded <= opt
    assert r.lb <= opt
    assert r.stop_reason == GAP_CLOSED


def test_table_output_shapes():
    g, spec = _easy()
    r = solve(g, spec)
    header = BoundReport.table_header()
    row = r.table_row()
    assert "graph" in header and "lb" in header
    assert r.name in row
    assert f"{r.lb:.4f}" in row
