import numpy as np
import pytest

import dcgridcert as dc
from dcgridcert.errors import BadEdge, DisconnectedGraph
from tests.conftest import random_connected_graph


def test_single_edge_incidence():
    g = dc.NetworkGraph(2, ((0, 1),))
    inc = dc.build_incidence(g)
    assert inc.tolist() == [[1], [-1]]


def test_three_bus_ring_incidence():
    g = dc.NetworkGraph(3, ((0, 1), (1, 2), (2, 0)))
    inc = dc.build_incidence(g)
    assert inc.tolist() == [[1, 0, -1], [-1, 1, 0], [0, -1, 1]]


def test_disconnected_graph_rejected():
    with pytest.raises(DisconnectedGraph):
        dc.NetworkGraph(4, ((0, 1),))


def test_bad_edges_rejected():
    with pytest.raises(BadEdge):
        dc.NetworkGraph(2, ((0, 2),))
    with pytest.raises(BadEdge):
        dc.NetworkGraph(2, ((1, 1),))


def test_single_edge_coupling():
    g = dc.NetworkGraph(2, ((0, 1),))
    cp = dc.build_coupling(dc.build_incidence(g))
    assert cp.selector(0).tolist() == [[1]]
    assert cp.selector(1).tolist() == [[1]]
    assert cp.gram.tolist() == [[1, 1], [1, 1]]
    assert np.abs(cp.gram).sum(axis=1).max() == 2


def test_ring_coupling_norm():
    g = dc.NetworkGraph(3, ((0, 1), (1, 2), (2, 0)))
    cp = dc.build_coupling(dc.build_incidence(g))
    assert np.abs(cp.gram).sum(axis=1).max() == 2


def test_star_coupling():
    g = dc.NetworkGraph(4, ((0, 1), (0, 2), (0, 3)))
    cp = dc.build_coupling(dc.build_incidence(g))
    A = cp.gram
    assert np.array_equal(A, A.T)
    assert np.linalg.eigvalsh(A.astype(float)).min() >= -1e-12
    assert np.abs(A).sum(axis=1).max() == 2


def test_random_graph_invariants():
    rng = np.random.default_rng(42)
    for _ in range(50):
        g = random_connected_graph(rng)
        inc = dc.build_incidence(g)
        assert inc.sum(axis=0).tolist() == [0] * g.n_edges
        assert np.linalg.matrix_rank(inc.astype(float)) == g.n_buses - 1
        cp = dc.build_coupling(inc)
        A = cp.gram
        assert np.array_equal(A, A.T)
        assert set(np.unique(A)).issubset({0, 1, 2})
        assert np.linalg.eigvalsh(A.astype(float)).min() >= -1e-12
        assert np.abs(A).sum(axis=1).max() == 2
        # selector masks reproduce the incidence sparsity
        assert np.array_equal(cp.selector_masks, (inc != 0).astype(np.int64))
        # stacked/gram consistency
        assert np.array_equal(cp.stacked @ cp.stacked.T, A)
        # M^T M = 2 I exactly (each edge has two endpoints)
        assert np.array_equal(cp.stacked.T @ cp.stacked, 2 * np.eye(g.n_edges, dtype=np.int64))


def test_neighbor_edges():
    g = dc.NetworkGraph(3, ((0, 1), (1, 2)))
    inc = dc.build_incidence(g)
    assert dc.netgraph.neighbor_edges(inc, 0).tolist() == [0]
    assert dc.netgraph.neighbor_edges(inc, 1).tolist() == [0, 1]
