import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs, random_connected_graph
from kronsync.errors import (
    DisconnectedGraph,
    InvalidBoundary,
    InvalidGraph,
    InvalidParameter,
    UnbalancedInjection,
)
from kronsync.graph_core import (
    PowerGraph,
    build_laplacian,
    eigendecompose,
    effective_resistance,
    generator_projector,
    incidence_matrix,
    incidence_spectral_norm,
    kron_reduce,
    lambda2,
    regularized_laplacian,
    resistance_matrix,
    total_effective_resistance_reduced,
)


def eliminate(L, boundary):
    """Schur complement by eliminating interior nodes one at a time."""
    L = L.copy()
    keep = list(range(L.shape[0]))
    for v in [v for v in range(L.shape[0]) if v not in boundary]:
        i = keep.index(v)
        piv = L[i, i]
        L = L - np.outer(L[:, i], L[i, :]) / piv
        L = np.delete(np.delete(L, i, 0), i, 1)
        keep.pop(i)
    order = [keep.index(b) for b in boundary]
    return L[np.ix_(order, order)]


def test_path_laplacian(path_graph):
    L = build_laplacian(path_graph)
    np.testing.assert_array_equal(L, [[2, -2, 0], [-2, 7, -5], [0, -5, 5]])


def test_single_edge_laplacian():
    g = PowerGraph(2, ((0, 1, 1.0),), (0,))
    np.testing.assert_array_equal(build_laplacian(g), [[1, -1], [-1, 1]])


def test_parallel_edges_merge():
    g = PowerGraph(3, ((0, 1, 1.0), (1, 0, 2.0), (1, 2, 1.0)), (0,))
    assert g.edges == ((0, 1, 3.0), (1, 2, 1.0))


@pytest.mark.parametrize("edges,gens,err", [
    (((0, 0, 1.0), (0, 1, 1.0)), (0,), InvalidGraph),
    (((0, 3, 1.0),), (0,), InvalidGraph),
    (((0, 1, -1.0), (1, 2, 1.0)), (0,), InvalidGraph),
    (((0, 1, 1.0),), (0, 1, 2), InvalidBoundary),
    (((0, 1, 1.0),), (), InvalidBoundary),
    (((0, 1, 1.0),), (0,), DisconnectedGraph),
])
def test_graph_validation(edges, gens, err):
    with pytest.raises(err):
        PowerGraph(3, edges, gens)


def test_unbalanced_injections_rejected():
    with pytest.raises(UnbalancedInjection):
        PowerGraph(2, ((0, 1, 1.0),), (0,), injections=(1.0, 0.0))


def test_random_laplacian_identities():
    g = random_connected_graph(np.random.default_rng(3), 8)
    L = build_laplacian(g)
    assert np.abs(L.sum(axis=1)).max() <= 1e-10
    assert abs(np.linalg.eigvalsh(L)[0]) <= 1e-10


def test_incidence_reproduces_laplacian(path_graph, case30):
    B = incidence_matrix(path_graph)
    W = np.diag(path_graph.weights)
    np.testing.assert_allclose(B.matrix @ W @ B.matrix.T, build_laplacian(path_graph))
    Bf = B.flipped().matrix
    np.testing.assert_allclose(Bf @ W @ Bf.T, build_laplacian(path_graph))
    assert incidence_matrix(case30).matrix.shape == (30, 41)


def test_kron_reduce_example_graph():
    pairs = [(1, 6), (6, 5), (5, 3), (2, 3), (1, 2), (4, 3), (6, 7)]
    g = PowerGraph(7, tuple((i - 1, j - 1, 1.0) for i, j in pairs), (0, 2, 6))
    L = build_laplacian(g)
    L_red = kron_reduce(L, g.generators)
    np.testing.assert_allclose(L_red, eliminate(L, list(g.generators)), atol=1e-12)
    # every pair of the three boundary nodes is coupled
    assert np.all(L_red[~np.eye(3, dtype=bool)] < 0)


def test_kron_reduce_leaf(path_graph):
    L_red = kron_reduce(build_laplacian(path_graph), [0, 1])
    np.testing.assert_allclose(L_red, [[2, -2], [-2, 2]], atol=1e-14)


def test_kron_reduce_follows_boundary_order():
    g = random_connected_graph(np.random.default_rng(5), 7, 3)
    L = build_laplacian(g)
    b = list(g.generators)
    perm = b[::-1]
    np.testing.assert_allclose(kron_reduce(L, perm), kron_reduce(L, b)[::-1, ::-1], atol=1e-12)


@pytest.mark.parametrize("boundary", [[], [0, 0], [0, 1, 2], [5]])
def test_kron_reduce_bad_boundary(path_graph, boundary):
    with pytest.raises(InvalidBoundary):
        kron_reduce(build_laplacian(path_graph), boundary)


def test_regularized_laplacian(path_graph, case30):
    L = build_laplacian(path_graph)
    np.testing.assert_allclose(regularized_laplacian(L, 1.0), L + np.ones((3, 3)) / 3)
    with pytest.raises(InvalidParameter):
        regularized_laplacian(L, 0.0)
    L30 = build_laplacian(case30)
    lam = np.linalg.eigvalsh(regularized_laplacian(L30, 1.0))
    assert abs(lam[0] - min(1.0, lambda2(L30))) <= 1e-8


def test_path_resistances(path_graph):
    L = build_laplacian(path_graph)
    assert effective_resistance(L, 0, 1) == pytest.approx(0.5, abs=1e-12)
    assert effective_resistance(L, 0, 2) == pytest.approx(0.7, abs=1e-12)
    assert effective_resistance(L, 2, 2) == 0.0


def test_generator_projector(path_graph, case30):
    np.testing.assert_allclose(generator_projector(3, [0, 1]),
                               [[0.5, -0.5, 0], [-0.5, 0.5, 0], [0, 0, 0]])
    np.testing.assert_array_equal(generator_projector(4, [2]), np.zeros((4, 4)))
    C = generator_projector(30, case30.generators)
    assert np.trace(C) == pytest.approx(5.0)


def test_total_resistance_examples(path_graph):
    assert total_effective_resistance_reduced(build_laplacian(path_graph), [0, 1]) == pytest.approx(0.5)
    # bridge of weight 4 between two clusters, boundary = its endpoints
    g = PowerGraph(5, ((0, 1, 1.0), (1, 2, 4.0), (2, 3, 1.0), (3, 4, 2.0)), (1, 2))
    assert total_effective_resistance_reduced(build_laplacian(g), [1, 2]) == pytest.approx(0.25)


def test_case30_baseline(case30):
    assert total_effective_resistance_reduced(build_laplacian(case30), case30.generators) == \
        pytest.approx(5.46, rel=0.01)


def test_spectra():
    g = PowerGraph(3, ((0, 1, 1.0), (1, 2, 1.0)), (0,))
    np.testing.assert_allclose(eigendecompose(build_laplacian(g)).eigenvalues, [0, 1, 3], atol=1e-12)
    n = 6
    K = PowerGraph(n, tuple((i, j, 1.0) for i, j in itertools.combinations(range(n), 2)), (0,))
    assert lambda2(build_laplacian(K)) == pytest.approx(n)


def test_incidence_norms():
    path = PowerGraph(3, ((0, 1, 1.0), (1, 2, 1.0)), (0,))
    assert incidence_spectral_norm(incidence_matrix(path)) == pytest.approx(np.sqrt(3))
    edge = PowerGraph(2, ((0, 1, 1.0),), (0,))
    assert incidence_spectral_norm(incidence_matrix(edge)) == pytest.approx(np.sqrt(2))
    K4 = PowerGraph(4, tuple((i, j, 1.0) for i, j in itertools.combinations(range(4), 2)), (0,))
    assert incidence_spectral_norm(incidence_matrix(K4)) == pytest.approx(2.0)


@given(graphs(max_n=12))
def test_kron_closure(g):
    L_red = kron_reduce(build_laplacian(g), g.generators)
    assert np.abs(L_red.sum(axis=1)).max() <= 1e-10
    np.testing.assert_allclose(L_red, L_red.T, atol=0)
    if g.k > 1:
        assert np.all(L_red[~np.eye(g.k, dtype=bool)] <= 1e-12)
        assert np.linalg.eigvalsh(L_red)[1] > 1e-10


@given(graphs(max_n=12, min_k=2))
def test_resistance_invariant_under_reduction(g):
    L = build_laplacian(g)
    L_red = kron_reduce(L, g.generators)
    R = resistance_matrix(L)
    R_red = resistance_matrix(L_red)
    gens = list(g.generators)
    assert np.abs(R[np.ix_(gens, gens)] - R_red).max() <= 1e-9


@given(graphs(max_n=10))
def test_resistance_beta_independent(g):
    L = build_laplacian(g)
    R = [resistance_matrix(L, b) for b in (0.1, 1.0, 10.0)]
    scale = R[1].max()
    assert np.abs(R[0] - R[1]).max() <= 1e-9 * scale
    assert np.abs(R[2] - R[1]).max() <= 1e-9 * scale


@given(graphs(max_n=9), st.integers(0, 10**6), st.floats(0.01, 10.0))
def test_rayleigh_monotonicity(g, pick, bump):
    e = pick % len(g.edges)
    w = g.weights.copy()
    w[e] += bump
    R0 = resistance_matrix(build_laplacian(g))
    R1 = resistance_matrix(build_laplacian(g.with_weights(w)))
    assert np.all(R1 <= R0 + 1e-12)


@given(graphs(max_n=9))
def test_sqrt_resistance_is_metric(g):
    D = np.sqrt(np.maximum(resistance_matrix(build_laplacian(g)), 0))
    n = g.n
    for i, j, k in itertools.permutations(range(n), 3):
        assert D[i, j] <= D[i, k] + D[k, j] + 1e-10


@given(graphs(max_n=10, min_k=2))
def test_reduced_spectrum_interlaces(g):
    lam = np.linalg.eigvalsh(build_laplacian(g))
    mu = np.linalg.eigvalsh(kron_reduce(build_laplacian(g), g.generators))
    n, k = g.n, g.k
    for i in range(k):
        assert lam[i] - 1e-9 <= mu[i] <= lam[i + n - k] + 1e-9


@given(graphs(max_n=10))
def test_projector_identities(g):
    C = generator_projector(g.n, g.generators)
    assert np.abs(C @ C - C).max() <= 1e-12
    np.testing.assert_array_equal(C, C.T)
    ind = np.zeros(g.n)
    ind[list(g.generators)] = 1
    assert np.abs(C @ ind).max() <= 1e-12
