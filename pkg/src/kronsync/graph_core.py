"""Graph algebra: Laplacians, incidence matrices, Kron reduction and
effective resistance.

Symmetric matrices are plain ``numpy.ndarray`` objects of shape ``(n, n)``.
Node indices are zero-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    DisconnectedGraph,
    InvalidBoundary,
    InvalidGraph,
    InvalidParameter,
    NumericalFailure,
    UnbalancedInjection,
)

BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class PowerGraph:
    """Weighted undirected network with a generator/load partition.

    ``edges`` holds ``(i, j, weight)`` triples; parallel edges are merged by
    summing their weights and every pair is stored with ``i < j`` in order of
    first appearance. Generators are identical, with inertia ``m`` and
    damping ``d``.
    """

    n: int
    edges: tuple
    generators: tuple
    m: float = 1.0
    d: float = 1.0
    injections: tuple | None = None
    bus_ids: tuple | None = None

    def __post_init__(self):
        n = int(self.n)
        if n < 2:
            raise InvalidGraph(f"need at least two nodes, got n={n}")
        merged: dict[tuple[int, int], float] = {}
        for e in self.edges:
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if i == j:
                raise InvalidGraph(f"self-loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidGraph(f"edge ({i}, {j}) out of range for n={n}")
            if not np.isfinite(w) or w < 0:
                raise InvalidGraph(f"edge ({i}, {j}) has invalid weight {w}")
            key = (min(i, j), max(i, j))
            merged[key] = merged.get(key, 0.0) + w
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple((i, j, w) for (i, j), w in merged.items()))

        gens = tuple(int(v) for v in self.generators)
        if len(set(gens)) != len(gens):
            raise InvalidBoundary("duplicate generator nodes")
        if not gens or len(gens) >= n:
            raise InvalidBoundary(f"need 1 <= k < n generators, got k={len(gens)}")
        if any(not 0 <= v < n for v in gens):
            raise InvalidBoundary("generator index out of range")
        object.__setattr__(self, "generators", gens)

        if not (self.m > 0 and self.d > 0):
            raise InvalidParameter("generator inertia and damping must be positive")
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "d", float(self.d))

        if self.injections is not None:
            p = np.asarray(self.injections, dtype=float)
            if p.shape != (n,):
                raise InvalidParameter(f"injections must have length {n}")
            if abs(p.sum()) > BALANCE_TOL * max(1.0, np.abs(p).sum()):
                raise UnbalancedInjection(f"injections sum to {p.sum():.3e}, expected 0")
            object.__setattr__(self, "injections", tuple(p.tolist()))
        if self.bus_ids is not None:
            if len(self.bus_ids) != n:
                raise InvalidGraph("bus_ids must have one label per node")
            object.__setattr__(self, "bus_ids", tuple(self.bus_ids))

        if not self.edges:
            raise DisconnectedGraph("graph has no edges")
        lap = laplacian_from_weights(n, self.sources, self.targets, self.weights)
        lam = np.linalg.eigvalsh(lap)
        if lam[1] <= connectivity_tolerance(lap):
            raise DisconnectedGraph(f"graph is disconnected (lambda2={lam[1]:.3e})")

    @cached_property
    def sources(self) -> np.ndarray:
        return np.array([e[0] for e in self.edges], dtype=int)

    @cached_property
    def targets(self) -> np.ndarray:
        return np.array([e[1] for e in self.edges], dtype=int)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([e[2] for e in self.edges], dtype=float)

    @property
    def k(self) -> int:
        return len(self.generators)

    @property
    def loads(self) -> tuple:
        gens = set(self.generators)
        return tuple(v for v in range(self.n) if v not in gens)

    @property
    def edge_pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j, _ in self.edges]

    def p(self) -> np.ndarray:
        if self.injections is None:
            return np.zeros(self.n)
        return np.array(self.injections)

    def with_weights(self, weights: Sequence[float]) -> "PowerGraph":
        """Copy of the graph with the same edge list and new weights."""
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(self.edges),):
            raise InvalidParameter("weight vector does not match edge count")
        edges = tuple((i, j, float(w)) for (i, j, _), w in zip(self.edges, weights))
        return PowerGraph(self.n, edges, self.generators, self.m, self.d,
                          self.injections, self.bus_ids)

    def with_injections(self, p) -> "PowerGraph":
        return PowerGraph(self.n, self.edges, self.generators, self.m, self.d,
                          None if p is None else tuple(np.asarray(p, float)), self.bus_ids)


@dataclass(frozen=True)
class IncidenceMatrix:
    """Oriented node-edge incidence: column ``e`` has +1 at ``sinks[e]``
    and -1 at ``sources[e]``."""

    n: int
    sources: np.ndarray
    sinks: np.ndarray
    matrix: np.ndarray = field(repr=False)

    @property
    def m_edges(self) -> int:
        return self.matrix.shape[1]

    def flipped(self) -> "IncidenceMatrix":
        return IncidenceMatrix(self.n, self.sinks, self.sources, -self.matrix)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def connectivity_tolerance(L: np.ndarray) -> float:
    mean_degree = float(np.trace(L)) / L.shape[0]
    return 1e-8 * max(mean_degree, np.finfo(float).tiny)


def incidence_from_pairs(n: int, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    pairs = list(pairs)
    B = np.zeros((n, len(pairs)))
    for e, (i, j) in enumerate(pairs):
        B[i, e] = -1.0
        B[j, e] = 1.0
    return B


def laplacian_from_weights(n, sources, targets, weights) -> np.ndarray:
    L = np.zeros((n, n))
    np.add.at(L, (sources, targets), -weights)
    np.add.at(L, (targets, sources), -weights)
    np.add.at(L, (sources, sources), weights)
    np.add.at(L, (targets, targets), weights)
    return L


def build_laplacian(g: PowerGraph) -> np.ndarray:
    """L = D - A. Connectivity was checked when ``g`` was built."""
    return laplacian_from_weights(g.n, g.sources, g.targets, g.weights)


def incidence_matrix(g: PowerGraph) -> IncidenceMatrix:
    return IncidenceMatrix(g.n, g.sources.copy(), g.targets.copy(),
                           incidence_from_pairs(g.n, g.edge_pairs))


def _check_boundary(n: int, boundary) -> np.ndarray:
    gens = np.asarray(sorted(set(int(v) for v in boundary)), dtype=int)
    if len(gens) != len(list(boundary)):
        raise InvalidBoundary("boundary contains duplicates")
    if gens.size == 0:
        raise InvalidBoundary("boundary set is empty")
    if gens.size >= n:
        raise InvalidBoundary("boundary must be a proper subset of the nodes")
    if gens[0] < 0 or gens[-1] >= n:
        raise InvalidBoundary("boundary node out of range")
    return np.asarray(list(boundary), dtype=int)


def kron_reduce(L: np.ndarray, boundary: Sequence[int]) -> np.ndarray:
    """Schur complement of ``L`` onto the boundary nodes.

    Rows and columns of the result follow the order of ``boundary``.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    gens = _check_boundary(n, boundary)
    mask = np.ones(n, dtype=bool)
    mask[gens] = False
    interior = np.flatnonzero(mask)
    L_gg = L[np.ix_(gens, gens)]
    L_gi = L[np.ix_(gens, interior)]
    L_ii = L[np.ix_(interior, interior)]
    try:
        factor = sla.cho_factor(L_ii, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError):
        raise NumericalFailure("interior block is not positive definite",
                               condition=float(np.linalg.cond(L_ii)))
    diag = np.abs(np.diag(factor[0]))
    if diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise NumericalFailure("interior block is numerically singular",
                               condition=float(np.linalg.cond(L_ii)))
    L_red = L_gg - L_gi @ sla.cho_solve(factor, L_gi.T)
    return 0.5 * (L_red + L_red.T)


def regularized_laplacian(L: np.ndarray, beta: float = 1.0) -> np.ndarray:
    """L + (beta/n) 11^T, positive definite for a connected graph."""
    if not beta > 0:
        raise InvalidParameter(f"beta must be positive, got {beta}")
    n = L.shape[0]
    return L + (beta / n) * np.ones((n, n))


def regularized_inverse(L: np.ndarray, beta: float = 1.0) -> np.ndarray:
    Lr = regularized_laplacian(L, beta)
    try:
        factor = sla.cho_factor(Lr, lower=True)
    except np.linalg.LinAlgError:
        raise NumericalFailure("regularized Laplacian is not positive definite",
                               condition=float(np.linalg.cond(Lr)))
    Y = sla.cho_solve(factor, np.eye(L.shape[0]))
    return 0.5 * (Y + Y.T)


def effective_resistance(L: np.ndarray, i: int, j: int, beta: float = 1.0) -> float:
    if i == j:
        return 0.0
    n = L.shape[0]
    b = np.zeros(n)
    b[i], b[j] = 1.0, -1.0
    Lr = regularized_laplacian(L, beta)
    try:
        v = sla.solve(Lr, b, assume_a="pos")
    except np.linalg.LinAlgError:
        raise NumericalFailure("regularized Laplacian is singular")
    return float(b @ v)


def resistance_matrix(L: np.ndarray, beta: float = 1.0) -> np.ndarray:
    """All pairwise effective resistances, R_ij = Y_ii + Y_jj - 2 Y_ij."""
    Y = regularized_inverse(L, beta)
    d = np.diag(Y)
    R = d[:, None] + d[None, :] - 2.0 * Y
    np.fill_diagonal(R, 0.0)
    return R


def generator_projector(n: int, boundary: Sequence[int]) -> np.ndarray:
    """C = E E^T - (1/k) 1_G 1_G^T, the orthogonal projector onto vectors
    supported on the boundary that sum to zero."""
    gens = np.asarray(list(boundary), dtype=int)
    k = len(gens)
    ind = np.zeros(n)
    ind[gens] = 1.0
    C = np.zeros((n, n))
    C[gens, gens] = 1.0
    C -= np.outer(ind, ind) / k
    return C


def total_effective_resistance_reduced(L: np.ndarray, boundary: Sequence[int],
                                       beta: float = 1.0) -> float:
    """Kirchhoff index of the Kron-reduced graph, k * trace(C Y)."""
    gens = _check_boundary(L.shape[0], boundary)
    Y = regularized_inverse(L, beta)
    Y_gg = Y[np.ix_(gens, gens)]
    k = len(gens)
    # k * trace(C Y) without forming C
    return float(k * np.trace(Y_gg) - Y_gg.sum())


def total_effective_resistance(L: np.ndarray, beta: float = 1.0) -> float:
    """Kirchhoff index of the full graph, half the sum of all r_ij."""
    return float(0.5 * resistance_matrix(L, beta).sum())


def eigendecompose(A: np.ndarray) -> EigenDecomposition:
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise NumericalFailure("matrix has non-finite entries")
    try:
        lam, V = np.linalg.eigh(0.5 * (A + A.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolver failed: {exc}")
    return EigenDecomposition(lam, V)


def lambda2(L: np.ndarray) -> float:
    try:
        return float(np.linalg.eigvalsh(0.5 * (L + L.T))[1])
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolver failed: {exc}")


def incidence_spectral_norm(B) -> float:
    """||B||_2 = sqrt(lambda_max(B B^T))."""
    M = B.matrix if isinstance(B, IncidenceMatrix) else np.asarray(B, dtype=float)
    return float(np.sqrt(max(np.linalg.eigvalsh(M @ M.T)[-1], 0.0)))


def edge_flows(delta: np.ndarray, sources, targets, weights) -> np.ndarray:
    """Line flows a_ij sin(delta_i - delta_j); ``delta`` may be batched (..., n)."""
    return weights * np.sin(delta[..., sources] - delta[..., targets])


def nodal_flows(delta: np.ndarray, sources, targets, weights, n: int) -> np.ndarray:
    """Net power leaving each node, sum_j a_ij sin(delta_i - delta_j)."""
    f = edge_flows(delta, sources, targets, weights)
    K = np.zeros((len(weights), n))
    K[np.arange(len(weights)), sources] = 1.0
    K[np.arange(len(weights)), targets] -= 1.0
    return f @ K
