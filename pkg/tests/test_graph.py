"""Graph construction, generators, Laplacian, and edge-list round trips."""

import math

import numpy as np
import pytest

from gpbound.graph import (GraphFormatError, GraphInstance, PartitionSpec,
                           gen_gnp_degree, gen_spinglass, gen_unit_disk,
                           laplacian, partition_cut_weight, read_edge_list,
                           write_edge_list)


def test_two_node_path_laplacian():
    g = GraphInstance(2, ((1, 2, 1.0),))
    np.testing.assert_array_equal(laplacian(g), [[1.0, -1.0], [-1.0, 1.0]])


def test_triangle_laplacian():
    g = GraphInstance(3, ((1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)))
    expect = 2.0 * np.eye(3) - (np.ones((3, 3)) - np.eye(3))
    np.testing.assert_array_equal(laplacian(g), expect)
    np.testing.assert_array_equal(laplacian(g).sum(axis=1), np.zeros(3))


def test_negative_weight_laplacian():
    g = GraphInstance(2, ((1, 2, -1.0),))
    np.testing.assert_array_equal(laplacian(g), [[-1.0, 1.0], [1.0, -1.0]])


def test_laplacian_zero_row_sums_random():
    for seed in range(5):
        g = gen_unit_disk(40, 0.4, seed)
        L = laplacian(g)
        norm = np.linalg.norm(L) or 1.0
        assert np.abs(L.sum(axis=1)).max() <= 1e-12 * norm
        np.testing.assert_array_equal(L, L.T)


def test_lifted_objective_matches_cut_weight():
    """Half the Laplacian paired with the partition indicator Gram matrix
    must reproduce the plain sum of crossing edge weights, including on
    negative weights."""
    rng = np.random.default_rng(7)
    g = gen_spinglass(2, 3, 0.5, seed=3)   # n=9, weights +/-1
    L = laplacian(g)
    for _ in range(20):
        labels = rng.integers(0, 3, size=g.n)
        P = np.zeros((g.n, 3))
        P[np.arange(g.n), labels] = 1.0
        lifted = 0.5 * np.sum(L * (P @ P.T))
        direct = sum(w for i, j, w in g.edges if labels[i - 1] != labels[j - 1])
        assert lifted == pytest.approx(direct, abs=1e-10)
        assert partition_cut_weight(g, labels) == pytest.approx(direct)


def test_graph_validation():
    with pytest.raises(ValueError):
        GraphInstance(3, ((1, 1, 1.0),))          # self loop
    with pytest.raises(ValueError):
        GraphInstance(3, ((2, 1, 1.0),))          # wrong orientation
    with pytest.raises(ValueError):
        GraphInstance(3, ((1, 2, 1.0), (1, 2, 2.0)))
    with pytest.raises(ValueError):
        GraphInstance(3, ((1, 4, 1.0),))
    with pytest.raises(ValueError):
        GraphInstance(2, ((1, 2, math.inf),))
    with pytest.raises(ValueError):
        GraphInstance(0, ())


def test_partition_spec():
    spec = PartitionSpec.equipartition(12, 3)
    assert spec.m == (4, 4, 4) and spec.n == 12 and spec.k == 3
    with pytest.raises(ValueError):
        PartitionSpec.equipartition(10, 3)
    bis = PartitionSpec.bisection(3, 5)   # sizes get sorted
    assert bis.m == (5, 3) and bis.kind == "bisection"
    with pytest.raises(ValueError):
        PartitionSpec("bisection", 3, (2, 2, 2))
    with pytest.raises(ValueError):
        PartitionSpec("equipartition", 2, (3, 2))


def test_gnp_complete_at_max_degree():
    g = gen_gnp_degree(10, 9.0, seed=5)
    assert g.num_edges == 45
    assert all(w == 1.0 for _, _, w in g.edges)


def test_gnp_invalid_degree():
    with pytest.raises(ValueError):
        gen_gnp_degree(10, 0.0, seed=0)
    with pytest.raises(ValueError):
        gen_gnp_degree(10, 9.5, seed=0)


def test_gnp_expected_degree():
    """Mean degree should land near the target (law of large numbers at
    n=400, tolerance 10%)."""
    g = gen_gnp_degree(400, 6.0, seed=1)
    assert 2.0 * g.num_edges / g.n == pytest.approx(6.0, rel=0.1)


def test_unit_disk_extremes():
    g = gen_unit_disk(12, math.sqrt(2.0), seed=2)
    assert g.num_edges == 12 * 11 // 2
    assert gen_unit_disk(12, 1e-9, seed=2).num_edges == 0
    with pytest.raises(ValueError):
        gen_unit_disk(12, 0.0, seed=2)
    with pytest.raises(ValueError):
        gen_unit_disk(12, 1.5, seed=2)


def test_spinglass_2d_counts():
    g = gen_spinglass(2, 3, 0.5, seed=0)
    assert g.n == 9
    assert g.num_edges == 18
    assert all(w in (-1.0, 1.0) for _, _, w in g.edges)


def test_spinglass_small_torus_collapses_parallel_edges():
    # 2 cells per axis: both neighbours along an axis coincide
    g2 = gen_spinglass(2, 2, 0.0, seed=0)
    assert g2.n == 4 and g2.num_edges == 4
    g3 = gen_spinglass(3, 2, 0.0, seed=0)
    assert g3.n == 8 and g3.num_edges == 12
    assert all(w == 1.0 for _, _, w in g3.edges)


def test_spinglass_3d_counts():
    g = gen_spinglass(3, 3, 1.0, seed=4)
    assert g.n == 27 and g.num_edges == 81
    assert all(w == -1.0 for _, _, w in g.edges)


def test_spinglass_degree_regularity():
    g = gen_spinglass(2, 5, 0.5, seed=9)
    A = g.adjacency()
    np.testing.assert_array_equal((A != 0).sum(axis=1), np.full(25, 4))


def test_generator_determinism():
    for make in (lambda s: gen_gnp_degree(30, 4.0, s),
                  lambda s: gen_unit_disk(30, 0.3, s),
                  lambda s: gen_spinglass(2, 4, 0.5, s)):
        assert make(11).edges == make(11).edges
    assert gen_gnp_degree(30, 4.0, 1).edges != gen_gnp_degree(30, 4.0, 2).edges


def test_edge_list_round_trip(tmp_path):
    g = gen_spinglass(2, 4, 0.5, seed=6)
    path = tmp_path / "g.el"
    write_edge_list(g, path)
    h = read_edge_list(path, name=g.name)
    assert h.n == g.n and h.edges == g.edges and h.name == g.name


def test_read_edge_list_basic(tmp_path):
    path = tmp_path / "p.el"
    path.write_text("2 1\n1 2 1\n")
    g = read_edge_list(path)
    assert g.n == 2 and g.edges == ((1, 2, 1.0),)
    assert g.name == "p"


def test_read_edge_list_swaps_orientation(tmp_path):
    path = tmp_path / "q.el"
    path.write_text("3 2\n2 1 1\n3 2 -1.5\n")
    g = read_edge_list(path)
    assert g.edges == ((1, 2, 1.0), (2, 3, -1.5))


def test_read_edge_list_errors(tmp_path):
    cases = {
        "bad_weight.el": ("2 1\n1 2 abc\n", "2"),
        "bad_header.el": ("2\n", "1"),
        "self_loop.el": ("2 1\n1 1 1\n", "2"),
        "wrong_count.el": ("3 2\n1 2 1\n", "2 edges"),
        "empty.el": ("", "empty"),
        "bad_arity.el": ("2 1\n1 2\n", "2"),
    }
    for fname, (text, needle) in cases.items():
        path = tmp_path / fname
        path.write_text(text)
        with pytest.raises(GraphFormatError) as err:
            read_edge_list(path)
        assert needle in str(err.value)


def test_integer_weight_detection():
    assert gen_gnp_degree(8, 3.0, 0).has_integer_weights()
    g = GraphInstance(2, ((1, 2, 0.5),))
    assert not g.has_integer_weights()


def test_weight_formatting_round_trip(tmp_path):
    g = GraphInstance(3, ((1, 2, -1.0), (1, 3, 0.25)))
    path = tmp_path / "w.el"
    write_edge_list(g, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "3 2"
    assert lines[1] == "1 2 -1"
    assert read_edge_list(path).edges == g.edges
