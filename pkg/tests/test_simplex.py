"""Bounded-variable simplex and its KKT certificate."""

import numpy as np
import pytest

import oracles
from gpbound.simplex import LpResult, kkt_residual, solve_lp


def _certify(res, c, lo, up, A, b, senses, tol=1e-8):
    assert res.status == "optimal"
    assert kkt_residual(c, lo, up, A, b, senses, res.x, res.y, res.z) <= tol


def test_bounds_only():
    # no rows at all: each variable snaps to the cheap end of its box
    c = [1.0, -2.0, 0.5]
    lo = [-1.0, -1.0, -1.0]
    up = [2.0, 3.0, 4.0]
    res = solve_lp(c, lo, up, [], [], "")
    np.testing.assert_allclose(res.x, [-1.0, 3.0, -1.0])
    assert res.obj == pytest.approx(-7.5)
    _certify(res, c, lo, up, [], [], "")


def test_single_equality():
    c = [1.0, 2.0]
    lo = [0.0, 0.0]
    up = [10.0, 10.0]
    A = [[1.0, 1.0]]
    res = solve_lp(c, lo, up, A, [4.0], "=")
    assert res.obj == pytest.approx(4.0)
    np.testing.assert_allclose(res.x, [4.0, 0.0], atol=1e-9)
    _certify(res, c, lo, up, A, [4.0], "=")


def test_mixed_senses():
    c = [-1.0, -1.0]
    lo = [0.0, 0.0]
    up = [5.0, 5.0]
    A = [[1.0, 2.0], [3.0, 1.0]]
    b = [6.0, 9.0]
    res = solve_lp(c, lo, up, A, b, "<<")
    want, _ = oracles.lp_value(c, lo, up, A, b, "<<")
    assert res.obj == pytest.approx(want, abs=1e-9)
    _certify(res, c, lo, up, A, b, "<<")


def test_greater_than_rows():
    c = [2.0, 3.0]
    lo = [0.0, 0.0]
    up = [10.0, 10.0]
    A = [[1.0, 1.0], [1.0, -1.0]]
    b = [3.0, -1.0]
    res = solve_lp(c, lo, up, A, b, ">>")
    want, _ = oracles.lp_value(c, lo, up, A, b, ">>")
    assert res.obj == pytest.approx(want, abs=1e-9)
    _certify(res, c, lo, up, A, b, ">>")


def test_infeasible_detected():
    res = solve_lp([1.0], [0.0], [1.0], [[1.0], [1.0]], [2.0, 0.5], "><")
    assert res.status == "infeasible"
    res2 = solve_lp([0.0, 0.0], [0.0, 0.0], [1.0, 1.0],
                    [[1.0, 1.0]], [3.0], "=")
    assert res2.status == "infeasible"


def test_unbounded_not_possible_with_finite_box():
    # every variable is boxed, so even a wildly negative objective is fine
    res = solve_lp([-1e6, -1e6], [0.0, 0.0], [1.0, 1.0], [], [], "")
    assert res.status == "optimal"
    assert res.obj == pytest.approx(-2e6)


def test_unbounded_detected():
    res = solve_lp([-1.0], [0.0], [np.inf], [], [], "")
    assert res.status == "unbounded"


def test_negative_lower_bounds():
    c = [1.0, 1.0]
    lo = [-2.0, -3.0]
    up = [2.0, 3.0]
    A = [[1.0, 1.0]]
    b = [-4.0]
    res = solve_lp(c, lo, up, A, b, "<")
    want, _ = oracles.lp_value(c, lo, up, A, b, "<")
    assert res.obj == pytest.approx(want, abs=1e-9)
    _certify(res, c, lo, up, A, b, "<")


def test_degenerate_vertex():
    # three constraints through the same point; Bland kicks in if cycling
    c = [-1.0, -1.0]
    lo = [0.0, 0.0]
    up = [4.0, 4.0]
    A = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    b = [2.0, 2.0, 4.0]
    res = solve_lp(c, lo, up, A, b, "<<<")
    assert res.obj == pytest.approx(-4.0)
    _certify(res, c, lo, up, A, b, "<<<")


def test_random_battery_matches_reference():
    rng = np.random.default_rng(20)
    solved = 0
    for _ in range(40):
        nv = int(rng.integers(2, 7))
        m = int(rng.integers(1, 5))
        c = rng.normal(size=nv)
        lo = rng.uniform(-2, 0, nv)
        up = lo + rng.uniform(0.5, 3, nv)
        A = rng.normal(size=(m, nv))
        b = rng.normal(size=m)
        senses = "".join(rng.choice(list("<=>")) for _ in range(m))
        res = solve_lp(c, lo, up, A, b, senses)
        want, _ = oracles.lp_value(c, lo, up, A, b, senses)
        if want is None:
            assert res.status == "infeasible"
            continue
        assert res.status == "optimal"
        assert res.obj == pytest.approx(want, abs=1e-7)
        _certify(res, c, lo, up, A, b, senses)
        solved += 1
    assert solved >= 20


def test_kkt_residual_flags_bad_pairs():
    c = [1.0, 1.0]
    lo = [0.0, 0.0]
    up = [1.0, 1.0]
    A = [[1.0, 1.0]]
    b = [1.0]
    res = solve_lp(c, lo, up, A, b, "=")
    good = kkt_residual(c, lo, up, A, b, "=", res.x, res.y, res.z)
    assert good <= 1e-9
    bad = kkt_residual(c, lo, up, A, b, "=", res.x + 0.2, res.y, res.z)
    assert bad > 0.1


def test_result_dataclass_fields():
    res = solve_lp([1.0], [0.0], [2.0], [], [], "")
    assert isinstance(res, LpResult)
    assert res.iterations >= 0
    assert res.x.shape == (1,)
    assert res.y.shape == (0,)
    assert res.z.shape == (1,)
