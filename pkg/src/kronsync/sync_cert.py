"""Certificates for gamma-cohesive synchronized states.

Three sufficient tests of increasing conservatism are provided for a
balanced injection vector ``p``:

* exact:       ||L^+ p||_{E,inf} <= sin(gamma)
* spectral:    ||B||_2 ||p||_2 / sin(gamma) <= lambda_2(L)
* conductance: 1 / r_ij >= ||B||_2 ||p||_2 / (2 sin(gamma)) for all i != j

together with a damped Newton solver for the synchronized angles themselves.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import InvalidParameter, NoSynchronizedState, UnbalancedInjection
from .graph_core import (
    BALANCE_TOL,
    PowerGraph,
    build_laplacian,
    incidence_from_pairs,
    incidence_spectral_norm,
    lambda2,
    nodal_flows,
    regularized_inverse,
    regularized_laplacian,
    resistance_matrix,
)

CERT_TOL = 1e-12


@dataclass(frozen=True)
class CohesionSpec:
    """Arc length ``gamma`` and injection-ball radius ``psi`` over the edge
    set ``edges_hat`` (the union of network and candidate edges)."""

    gamma: float
    psi: float
    n: int
    edges_hat: tuple

    def __post_init__(self):
        if not 0 < self.gamma < np.pi / 2:
            raise InvalidParameter(f"gamma must lie in (0, pi/2), got {self.gamma}")
        if self.psi < 0:
            raise InvalidParameter(f"psi must be nonnegative, got {self.psi}")
        if not self.edges_hat:
            raise InvalidParameter("edge set is empty")
        pairs = []
        seen = set()
        for i, j in self.edges_hat:
            key = (min(int(i), int(j)), max(int(i), int(j)))
            if key[0] == key[1] or not (0 <= key[0] and key[1] < self.n):
                raise InvalidParameter(f"invalid edge {key}")
            if key not in seen:
                seen.add(key)
                pairs.append(key)
        object.__setattr__(self, "edges_hat", tuple(pairs))

    @classmethod
    def for_graph(cls, g: PowerGraph, gamma: float, psi: float,
                  candidate_edges: Sequence | None = None) -> "CohesionSpec":
        pairs = list(g.edge_pairs)
        if candidate_edges is not None:
            pairs += [tuple(e) for e in candidate_edges]
        return cls(gamma, psi, g.n, tuple(pairs))

    @cached_property
    def incidence(self) -> np.ndarray:
        return incidence_from_pairs(self.n, self.edges_hat)

    @cached_property
    def b_norm(self) -> float:
        return incidence_spectral_norm(self.incidence)

    def with_psi(self, psi: float) -> "CohesionSpec":
        return CohesionSpec(self.gamma, psi, self.n, self.edges_hat)


@dataclass(frozen=True)
class Certificate:
    kind: str
    holds: bool
    margin: float
    threshold: float


@dataclass(frozen=True)
class SyncState:
    angles: np.ndarray
    incremental_norm: float
    residual: float
    iterations: int


def incremental_inf_norm(x, edges) -> float:
    """max over edges {i, j} of |x_i - x_j|."""
    x = np.asarray(x, dtype=float)
    edges = np.asarray(list(edges), dtype=int).reshape(-1, 2)
    if edges.size == 0:
        raise InvalidParameter("edge set is empty")
    return float(np.abs(x[edges[:, 0]] - x[edges[:, 1]]).max())


def _check_balanced(p):
    p = np.asarray(p, dtype=float)
    if abs(p.sum()) > BALANCE_TOL * max(1.0, np.abs(p).sum()):
        raise UnbalancedInjection(f"injections sum to {p.sum():.3e}, expected 0")
    return p


def _cert(kind, margin, threshold):
    return Certificate(kind, bool(margin >= -CERT_TOL), float(margin), float(threshold))


def exact_cohesion_check(L: np.ndarray, p, spec: CohesionSpec) -> Certificate:
    p = _check_balanced(p)
    theta = regularized_inverse(L) @ p  # equals L^+ p on the balanced subspace
    norm = incremental_inf_norm(theta, spec.edges_hat)
    s = np.sin(spec.gamma)
    return _cert("exact", s - norm, s)


def spectral_threshold(p_norm: float, spec: CohesionSpec) -> float:
    return spec.b_norm * p_norm / np.sin(spec.gamma)


def spectral_sufficient_check(L: np.ndarray, p_norm: float, spec: CohesionSpec) -> Certificate:
    tau = spectral_threshold(p_norm, spec)
    return _cert("spectral", lambda2(L) - tau, tau)


def lmi_threshold(spec: CohesionSpec) -> float:
    """tau = psi ||B||_2 / sin(gamma); L(x) >= tau Pi_n iff lambda_2 >= tau."""
    return spectral_threshold(spec.psi, spec)


def lmi_margin(L: np.ndarray, tau: float) -> float:
    """Smallest eigenvalue of L - tau Pi_n restricted to the complement of 1."""
    n = L.shape[0]
    U = sla.null_space(np.ones((1, n)))
    M = U.T @ L @ U - tau * np.eye(n - 1)
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def conductance_sufficient_check(L: np.ndarray, p_norm: float, spec: CohesionSpec) -> Certificate:
    bound = spec.b_norm * p_norm / (2.0 * np.sin(spec.gamma))
    R = resistance_matrix(L)
    iu = np.triu_indices(L.shape[0], 1)
    min_conductance = float((1.0 / R[iu]).min())
    return _cert("conductance", min_conductance - bound, bound)


def solve_sync_state(g: PowerGraph, p=None, tol: float = 1e-10,
                     max_iter: int = 100) -> SyncState:
    """Synchronized angles with sum_j a_ij sin(d_i - d_j) = p_i at every node.

    Newton's method started from the linearized solution L^+ p; steps are
    damped so every edge angle difference stays inside (-pi/2, pi/2), where
    the cohesive solution is unique.
    """
    p = _check_balanced(g.p() if p is None else p)
    n = g.n
    src, dst, w = g.sources, g.targets, g.weights
    L = build_laplacian(g)
    delta = regularized_inverse(L) @ p
    ones = np.ones((n, n)) / n

    def residual(x):
        return p - nodal_flows(x, src, dst, w, n)

    def max_diff(x):
        return float(np.abs(x[src] - x[dst]).max()) if len(src) else 0.0

    # pull the linear guess back inside the cohesive region if needed
    limit = np.pi / 2 - 1e-6
    if max_diff(delta) >= limit:
        delta *= 0.9 * limit / max_diff(delta)
    r = residual(delta)
    for it in range(1, max_iter + 1):
        cw = w * np.cos(delta[src] - delta[dst])
        J = np.zeros((n, n))
        np.add.at(J, (src, dst), -cw)
        np.add.at(J, (dst, src), -cw)
        np.add.at(J, (src, src), cw)
        np.add.at(J, (dst, dst), cw)
        try:
            step = np.linalg.solve(J + ones, r)
        except np.linalg.LinAlgError:
            raise NoSynchronizedState("singular power-flow Jacobian")
        t = 1.0
        rnorm = np.abs(r).max()
        while True:
            trial = delta + t * step
            if max_diff(trial) < limit:
                r_trial = residual(trial)
                if np.abs(r_trial).max() < (1 - 1e-4 * t) * rnorm or t < 1e-3:
                    break
            t *= 0.5
            if t < 1e-10:
                raise NoSynchronizedState(
                    "Newton step left the cohesive region; injections may be infeasible")
        delta, r = trial - trial.mean(), r_trial
        if np.abs(r).max() <= tol:
            return SyncState(delta, incremental_inf_norm(delta, g.edge_pairs),
                             float(np.abs(r).max()), it)
    raise NoSynchronizedState(f"Newton did not converge in {max_iter} iterations "
                              f"(residual {np.abs(r).max():.3e})")


def certify_all(L: np.ndarray, spec: CohesionSpec, p=None) -> dict[str, Certificate]:
    """Run every applicable certificate; ``p`` defaults to the worst case of
    the psi ball (norm ``spec.psi``) for the norm-based tests."""
    p_norm = spec.psi if p is None else float(np.linalg.norm(p))
    out = {
        "spectral": spectral_sufficient_check(L, p_norm, spec),
        "conductance": conductance_sufficient_check(L, p_norm, spec),
    }
    if p is not None:
        out["exact"] = exact_cohesion_check(L, p, spec)
    return out


__all__ = [
    "CohesionSpec", "Certificate", "SyncState", "incremental_inf_norm",
    "exact_cohesion_check", "spectral_sufficient_check", "spectral_threshold",
    "lmi_threshold", "lmi_margin", "conductance_sufficient_check",
    "solve_sync_state", "certify_all", "regularized_laplacian",
]
