"""Budget allocation of line susceptance.

The design vector ``x`` adds weight ``x_e`` to every candidate edge, giving
``L(x) = L_0 + B_c diag(x) B_c^T``. The cost is

    f(x) = trace(C L_reg(x)^{-1}) = R_tot(G_red(x)) / k,

which is convex and non-increasing in ``x``. Without a cohesion constraint
the problem is solved with spectral projected gradient over the box-simplex
``{x >= lb, 1^T x <= alpha}``. With the constraint ``lambda_2(L(x)) >= tau``
a primal log-barrier interior-point method is used: at the optimum of the
rewiring problem the second eigenvalue is typically repeated, which rules
out methods that rely on a differentiable ``lambda_2``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import lsq_linear

from .errors import Infeasible, InvalidParameter, NotConverged, NumericalFailure
from .graph_core import (
    PowerGraph,
    build_laplacian,
    generator_projector,
    incidence_from_pairs,
    lambda2,
)
from .sync_cert import CohesionSpec, lmi_threshold

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    stationarity_tol: float = 1e-6
    max_iter: int = 50_000
    gap_tol: float = 1e-9
    barrier_growth: float = 10.0
    newton_tol: float = 1e-10
    max_newton: int = 200
    infeasibility_tol: float = 1e-8


@dataclass(frozen=True)
class DesignProblem:
    base_graph: PowerGraph
    alpha: float
    candidate_edges: tuple | None = None
    beta: float = 1.0
    cohesion: CohesionSpec | None = None
    allow_negative: bool = False
    lower_bounds: tuple | None = None

    def __post_init__(self):
        g = self.base_graph
        if self.candidate_edges is None:
            pairs = tuple(g.edge_pairs)
        else:
            pairs = tuple((min(int(i), int(j)), max(int(i), int(j)))
                          for i, j in self.candidate_edges)
        if not pairs:
            raise InvalidParameter("no candidate edges")
        if len(set(pairs)) != len(pairs):
            raise InvalidParameter("candidate edges must be distinct")
        for i, j in pairs:
            if i == j or not (0 <= i and j < g.n):
                raise InvalidParameter(f"invalid candidate edge ({i}, {j})")
        object.__setattr__(self, "candidate_edges", pairs)
        if not (self.alpha >= 0 and np.isfinite(self.alpha)):
            raise InvalidParameter(f"budget must be finite and nonnegative, got {self.alpha}")
        if not self.beta > 0:
            raise InvalidParameter(f"beta must be positive, got {self.beta}")
        if self.lower_bounds is None:
            if self.allow_negative:
                lb = -self.base_weights
            else:
                lb = np.zeros(len(pairs))
        else:
            lb = np.asarray(self.lower_bounds, dtype=float)
            if lb.shape != (len(pairs),):
                raise InvalidParameter("lower_bounds does not match candidate edges")
            if np.any(lb > 0):
                raise InvalidParameter("lower bounds must be nonpositive")
            if np.any(lb < -self.base_weights - 1e-12):
                raise InvalidParameter("lower bounds would make edge weights negative")
        object.__setattr__(self, "lower_bounds", tuple(float(v) for v in lb))

    @property
    def base_weights(self) -> np.ndarray:
        w = dict(zip(self.base_graph.edge_pairs, self.base_graph.weights))
        return np.array([w.get(p, 0.0) for p in self.candidate_edges])

    @property
    def lb(self) -> np.ndarray:
        return np.array(self.lower_bounds)

    @property
    def m(self) -> int:
        return len(self.candidate_edges)

    @property
    def tau(self) -> float:
        return 0.0 if self.cohesion is None else lmi_threshold(self.cohesion)

    def cohesion_spec(self, gamma: float, psi: float) -> CohesionSpec:
        return CohesionSpec.for_graph(self.base_graph, gamma, psi, self.candidate_edges)

    def with_cohesion(self, cohesion: CohesionSpec | None) -> "DesignProblem":
        return replace(self, cohesion=cohesion)

    def design_graph(self, x) -> PowerGraph:
        """The network with weight ``a_e + x_e`` on every candidate edge."""
        x = np.asarray(x, dtype=float)
        g = self.base_graph
        extra = [(i, j, v) for (i, j), v in zip(self.candidate_edges, x)]
        # fold into the existing weights so that negative updates are allowed
        weights: dict = {}
        for i, j, w in list(g.edges) + extra:
            weights[(i, j)] = weights.get((i, j), 0.0) + w
        edges = tuple((i, j, max(w, 0.0)) for (i, j), w in weights.items())
        return PowerGraph(g.n, edges, g.generators, g.m, g.d, g.injections, g.bus_ids)


@dataclass
class OptimizationResult:
    x_star: np.ndarray
    objective: float
    r_tot_reduced: float
    lambda2: float
    stationarity: float
    feasibility_violation: float
    iterations: int
    budget_used: float
    method: str = ""
    tau: float = 0.0
    duality_gap: float = 0.0
    lower_bound_active: bool = False
    converged: bool = True
    candidate_edges: tuple = field(default=(), repr=False)

    def as_dict(self) -> dict:
        return {
            "x_star": [float(v) for v in self.x_star],
            "candidate_edges": [list(p) for p in self.candidate_edges],
            "objective": self.objective,
            "r_tot_reduced": self.r_tot_reduced,
            "lambda2": self.lambda2,
            "tau": self.tau,
            "stationarity": self.stationarity,
            "feasibility_violation": self.feasibility_violation,
            "duality_gap": self.duality_gap,
            "iterations": self.iterations,
            "budget_used": self.budget_used,
            "method": self.method,
            "lower_bound_active": self.lower_bound_active,
            "converged": self.converged,
        }


class _Model:
    """Matrices shared by every evaluation of one design problem."""

    def __init__(self, prob: DesignProblem):
        g = prob.base_graph
        self.prob = prob
        self.n = g.n
        self.k = g.k
        self.L0 = build_laplacian(g)
        self.B = incidence_from_pairs(g.n, prob.candidate_edges)
        self.C = generator_projector(g.n, g.generators)
        self.J = np.full((g.n, g.n), 1.0 / g.n)
        self.Pi = np.eye(g.n) - self.J
        self.lb = prob.lb
        self.alpha = float(prob.alpha)

    def laplacian(self, x) -> np.ndarray:
        return self.L0 + (self.B * x) @ self.B.T

    def _chol(self, Y):
        try:
            return sla.cho_factor(Y, lower=True)
        except np.linalg.LinAlgError:
            raise NumericalFailure("regularized Laplacian is not positive definite",
                                   float(np.linalg.cond(Y)))

    def objective(self, x) -> float:
        Y = self.laplacian(x) + self.prob.beta * self.J
        Z = sla.cho_solve(self._chol(Y), np.eye(self.n))
        return float(np.sum(self.C * Z))

    def objective_grad(self, x, hessian=False):
        Y = self.laplacian(x) + self.prob.beta * self.J
        Z = sla.cho_solve(self._chol(Y), np.eye(self.n))
        Z = 0.5 * (Z + Z.T)
        # C is an orthogonal projector, so Z C Z = (C Z)^T (C Z) and each
        # gradient entry is a negated sum of squares, nonpositive exactly
        W = self.C @ (Z @ self.B)
        f = float(np.sum(self.C * Z))
        grad = -np.einsum("ij,ij->j", W, W)
        if not hessian:
            return f, grad
        H = 2.0 * (self.B.T @ Z @ self.B) * (W.T @ W)
        return f, grad, 0.5 * (H + H.T)

    def lambda2(self, x) -> float:
        return lambda2(self.laplacian(x))


def objective_and_gradient(prob: DesignProblem, x) -> tuple[float, np.ndarray]:
    """f(x) = trace(C L_reg(x)^{-1}) and its gradient -(B^T Z C Z B)_ee."""
    x = np.asarray(x, dtype=float)
    if x.shape != (prob.m,):
        raise InvalidParameter(f"design vector must have length {prob.m}")
    return _Model(prob).objective_grad(x)


def objective_hessian(prob: DesignProblem, x) -> np.ndarray:
    return _Model(prob).objective_grad(np.asarray(x, dtype=float), hessian=True)[2]


def project_box_simplex(y, lb, alpha: float) -> np.ndarray:
    """Euclidean projection onto {x : x >= lb, sum(x) <= alpha}."""
    y = np.asarray(y, dtype=float)
    lb = np.asarray(lb, dtype=float)
    z = y - lb
    budget = alpha - lb.sum()
    if budget < -1e-12:
        raise InvalidParameter("lower bounds exceed the budget")
    budget = max(budget, 0.0)
    zp = np.maximum(z, 0.0)
    if zp.sum() <= budget:
        return lb + zp
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - budget
    idx = np.arange(1, len(u) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return lb + np.maximum(z - theta, 0.0)


def _finish(model: _Model, x, stationarity, iterations, method, gap=0.0,
            converged=True) -> OptimizationResult:
    prob = model.prob
    f = model.objective(x)
    lam2 = model.lambda2(x)
    tau = prob.tau
    simplex_violation = max(0.0, float(x.sum()) - prob.alpha, float(np.max(prob.lb - x, initial=0.0)))
    viol = max(0.0, tau - lam2) if prob.cohesion is not None else 0.0
    lb_active = bool(prob.allow_negative and np.any(x - prob.lb <= 1e-6 * max(1.0, np.abs(prob.lb).max())))
    return OptimizationResult(
        x_star=np.asarray(x, dtype=float), objective=f, r_tot_reduced=model.k * f,
        lambda2=lam2, stationarity=float(stationarity),
        feasibility_violation=max(viol, simplex_violation), iterations=int(iterations),
        budget_used=float(np.sum(x)), method=method, tau=tau, duality_gap=float(gap),
        lower_bound_active=lb_active, converged=converged,
        candidate_edges=prob.candidate_edges)


def solve_p0(prob: DesignProblem, config: SolverConfig = SolverConfig(),
             x0=None) -> OptimizationResult:
    """Minimize f over the box-simplex, ignoring any cohesion constraint.

    Spectral projected gradient with Barzilai-Borwein steps and a
    nonmonotone Armijo search. Stationarity is the infinity norm of
    ``P(x - grad f(x)) - x``.
    """
    model = _Model(prob)
    lb, alpha = model.lb, model.alpha
    if alpha - lb.sum() <= 0:
        x = lb.copy()
        return _finish(model, x, 0.0, 0, "spg")
    proj = lambda y: project_box_simplex(y, lb, alpha)  # noqa: E731
    x = proj(lb + (alpha - lb.sum()) / prob.m if x0 is None else np.asarray(x0, float))
    f, g = model.objective_grad(x)
    step = 1.0 / max(np.abs(g).max(), 1e-12)
    history = [f]
    best = (f, x, np.inf)
    for it in range(1, config.max_iter + 1):
        res = np.abs(proj(x - g) - x).max()
        if res < best[2] or f < best[0]:
            best = (f, x, res) if f <= best[0] else best
        if res <= config.stationarity_tol:
            return _finish(model, x, res, it - 1, "spg")
        d = proj(x - step * g) - x
        slope = float(g @ d)
        f_ref = max(history[-10:])
        t = 1.0
        while True:
            x_new = x + t * d
            try:
                f_new, g_new = model.objective_grad(x_new)
            except NumericalFailure:
                f_new = np.inf
            if f_new <= f_ref + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if not np.isfinite(f_new):
            raise NumericalFailure("projected gradient left the domain of the objective")
        s, yv = x_new - x, g_new - g
        sy = float(s @ yv)
        step = float(s @ s) / sy if sy > 1e-300 else 1.0 / max(np.abs(g_new).max(), 1e-12)
        step = min(max(step, 1e-10), 1e10)
        x, f, g = x_new, f_new, g_new
        history.append(f)
    res = np.abs(proj(x - g) - x).max()
    result = _finish(model, x, res, config.max_iter, "spg", converged=False)
    raise NotConverged(f"projected gradient hit the iteration cap (stationarity {res:.3e})", result)


class _Barrier:
    """Log-barrier pieces for the box-simplex and the cohesion LMI

        S(x, s) = L(x) - s Pi + J/n  >  0,

    which on the complement of 1 is equivalent to lambda_2(L(x)) > s.
    """

    def __init__(self, model: _Model):
        self.model = model
        self.has_budget = True

    def slacks(self, x):
        return x - self.model.lb, self.model.alpha - x.sum()

    def S(self, x, s):
        md = self.model
        return md.laplacian(x) - s * md.Pi + md.J

    def value(self, x, s) -> float:
        lo, bud = self.slacks(x)
        if np.any(lo <= 0) or bud <= 0:
            return np.inf
        try:
            c, _ = sla.cho_factor(self.S(x, s), lower=True)
        except np.linalg.LinAlgError:
            return np.inf
        logdet = 2.0 * np.log(np.diag(c)).sum()
        return float(-logdet - np.log(lo).sum() - np.log(bud))

    def derivatives(self, x, s, with_s: bool):
        """Gradient and Hessian in (x) or (x, s)."""
        md = self.model
        lo, bud = self.slacks(x)
        W = sla.cho_solve(sla.cho_factor(self.S(x, s), lower=True), np.eye(md.n))
        W = 0.5 * (W + W.T)
        BW = md.B.T @ W
        G = BW @ md.B
        gx = -np.diag(G) - 1.0 / lo + 1.0 / bud
        Hx = G * G + np.diag(1.0 / lo ** 2) + 1.0 / bud ** 2
        if not with_s:
            return gx, Hx
        WP = W @ md.Pi
        gs = float(np.trace(WP))
        hss = float(np.sum(WP * WP.T))
        hxs = -np.einsum("ij,ji->i", BW @ md.Pi, W @ md.B)
        g = np.append(gx, gs)
        H = np.block([[Hx, hxs[:, None]], [hxs[None, :], np.array([[hss]])]])
        return g, H

    @property
    def nu(self) -> float:
        return (self.model.n - 1) + self.model.prob.m + 1.0


def _newton_direction(H, g):
    d = np.sqrt(np.clip(np.diag(H), 1e-300, None))
    Hs = H / d[:, None] / d[None, :]
    try:
        y = sla.solve(Hs, -g / d, assume_a="pos")
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(Hs, -g / d, rcond=None)[0]
    return y / d


def _center(phi: Callable, grad_hess: Callable, z, config: SolverConfig):
    """Damped Newton minimization of a self-concordant barrier function."""
    val = phi(z)
    for it in range(config.max_newton):
        g, H = grad_hess(z)
        dz = _newton_direction(H, g)
        dec2 = float(-g @ dz)
        if dec2 / 2.0 <= config.newton_tol:
            return z, it
        t = 1.0
        while True:
            trial = z + t * dz
            v = phi(trial)
            # inside the quadratic region the barrier value is dominated by
            # rounding, so a full step that stays in the domain is accepted
            if np.isfinite(v) and (v <= val - 0.25 * t * dec2 or (t == 1.0 and dec2 < 1e-2)):
                break
            t *= 0.5
            if t < 1e-14:
                return z, it
        z, val = trial, v
    return z, config.max_newton


def _interior_point(prob: DesignProblem):
    """A strictly interior point of the box-simplex."""
    lb = prob.lb
    room = prob.alpha - lb.sum()
    if room <= 0:
        return None
    return lb + room / (prob.m + 1.0)


@dataclass(frozen=True)
class Lambda2Max:
    value: float
    x: np.ndarray
    duality_gap: float
    iterations: int


def maximize_lambda2(prob: DesignProblem, config: SolverConfig = SolverConfig()) -> Lambda2Max:
    """Largest algebraic connectivity achievable over the box-simplex."""
    model = _Model(prob)
    x0 = _interior_point(prob)
    if x0 is None:
        x = prob.lb.copy()
        return Lambda2Max(model.lambda2(x), x, 0.0, 0)
    bar = _Barrier(model)
    lam0 = model.lambda2(x0)
    z = np.append(x0, lam0 - max(1.0, abs(lam0)))
    scale = max(1.0, lam0)
    t = 1.0 / scale
    nu = bar.nu
    iters = 0
    while True:
        phi = lambda v: -t * v[-1] + bar.value(v[:-1], v[-1])  # noqa: E731

        def gh(v):
            g, H = bar.derivatives(v[:-1], v[-1], with_s=True)
            g[-1] -= t
            return g, H

        z, k = _center(phi, gh, z, config)
        iters += k
        if nu / t <= config.gap_tol * scale:
            break
        t *= config.barrier_growth
    x = z[:-1]
    return Lambda2Max(model.lambda2(x), x, nu / t, iters)


def _feasible_start(prob, model, lmax: Lambda2Max, tau):
    """Strictly feasible point for lambda_2 >= tau, as far from the box
    boundary as concavity of lambda_2 allows."""
    x0 = _interior_point(prob)
    l0 = model.lambda2(x0)
    if l0 > tau:
        theta = 1.0
        if l0 - tau < 1e-3 * max(1.0, tau):
            theta = 0.5
    else:
        theta = 0.5 * (lmax.value - tau) / (lmax.value - l0)
    return (1.0 - theta) * lmax.x + theta * x0


def _kkt_residual(model: _Model, bar: _Barrier, x, tau: float, t: float) -> float:
    """Infinity norm of the Lagrangian gradient at ``x``.

    The barrier supplies duals Z = S^{-1}/t, nu = 1/(t (x - lb)) and
    mu = 1/(t (alpha - 1^T x)), but near the optimum the slacks and the small
    eigenvalues of S are dominated by cancellation. The multipliers are
    therefore refitted on the identified active set (Z supported on the
    near-null eigenspace of S) by bounded least squares; the barrier duals
    are the fallback when the refit does not give a valid dual point.
    """
    _, gf = model.objective_grad(x)
    gb, _ = bar.derivatives(x, tau, with_s=False)
    barrier_res = float(np.abs(gf + gb / t).max())

    lo, bud = bar.slacks(x)
    m = len(x)
    scale = max(1.0, tau)
    lam, U = np.linalg.eigh(bar.S(x, tau))
    U = U[:, lam <= 1e-5 * scale]
    r = U.shape[1]
    P = U.T @ model.B                                   # r x m
    cols, lower = [], []
    for a in range(r):
        for b in range(a, r):
            c = P[a] * P[b] * (1.0 if a == b else 2.0)
            cols.append(-c)
            lower.append(0.0 if a == b else -np.inf)
    if bud <= 1e-5 * max(1.0, abs(model.alpha)):
        cols.append(np.ones(m))                         # budget multiplier
        lower.append(0.0)
    active = np.nonzero(lo <= 1e-5 * np.maximum(1.0, np.abs(model.lb)))[0]
    for e in active:
        col = np.zeros(m)
        col[e] = -1.0
        cols.append(col)
        lower.append(0.0)
    if not cols:
        return barrier_res
    A = np.column_stack(cols)
    fit = lsq_linear(A, -gf, bounds=(np.array(lower), np.full(len(lower), np.inf)),
                     method="bvls", tol=1e-15)
    Q = np.zeros((r, r))
    i = 0
    for a in range(r):
        for b in range(a, r):
            Q[a, b] = Q[b, a] = fit.x[i]
            i += 1
    if r and np.linalg.eigvalsh(Q)[0] < -1e-10 * max(1.0, np.abs(Q).max()):
        return barrier_res
    return min(barrier_res, float(np.abs(A @ fit.x + gf).max()))


def solve_p2(prob: DesignProblem, config: SolverConfig = SolverConfig()) -> OptimizationResult:
    """Minimize f subject to the box-simplex and lambda_2(L(x)) >= tau."""
    if prob.cohesion is None:
        raise InvalidParameter("cohesion-constrained solve needs a CohesionSpec")
    model = _Model(prob)
    tau = prob.tau
    lmax = maximize_lambda2(prob, config)
    if lmax.value < tau - config.infeasibility_tol:
        raise Infeasible(
            f"largest achievable lambda_2 {lmax.value:.6g} is below the threshold {tau:.6g}",
            max_lambda2=lmax.value, threshold=tau)
    if _interior_point(prob) is None or lmax.value <= tau + lmax.duality_gap:
        # no strict interior: the maximizer of lambda_2 is the only candidate
        return _finish(model, lmax.x, 0.0, lmax.iterations, "barrier", lmax.duality_gap)
    bar = _Barrier(model)
    x = _feasible_start(prob, model, lmax, tau)
    nu = bar.nu
    f0, g0 = model.objective_grad(x)
    gb, _ = bar.derivatives(x, tau, with_s=False)
    t = max(1.0, np.linalg.norm(gb) / max(np.linalg.norm(g0), 1e-12))
    scale = max(1.0, abs(f0))
    iters = lmax.iterations
    while True:
        def phi(v):
            b = bar.value(v, tau)
            return b + t * model.objective(v) if np.isfinite(b) else np.inf

        def gh(v):
            _, gf, Hf = model.objective_grad(v, hessian=True)
            gb, Hb = bar.derivatives(v, tau, with_s=False)
            return t * gf + gb, t * Hf + Hb

        x, k = _center(phi, gh, x, config)
        iters += k
        if nu / t <= config.gap_tol * scale:
            break
        t *= config.barrier_growth
    stationarity = _kkt_residual(model, bar, x, tau, t)
    result = _finish(model, x, stationarity, iters, "barrier", nu / t)
    if result.feasibility_violation > 1e-6:
        result.converged = False
        raise NotConverged("barrier iterate violates the constraints", result)
    return result


def solve_rewire(prob: DesignProblem, config: SolverConfig = SolverConfig()) -> OptimizationResult:
    """Redistribute existing susceptance: alpha = 0 and x_e >= -a_e."""
    if not prob.allow_negative:
        prob = replace(prob, allow_negative=True, lower_bounds=None)
    if prob.alpha != 0:
        prob = replace(prob, alpha=0.0)
    if prob.cohesion is None:
        raise InvalidParameter("rewiring needs a cohesion constraint to keep the graph connected")
    return solve_p2(prob, config)


def solve(prob: DesignProblem, config: SolverConfig = SolverConfig()) -> OptimizationResult:
    if prob.cohesion is None:
        return solve_p0(prob, config)
    return solve_p2(prob, config)


@dataclass(frozen=True)
class SweepPoint:
    gamma: float
    psi: float
    feasible: bool
    objective: float
    r_tot_reduced: float


@dataclass(frozen=True)
class SweepResult:
    gamma: float
    psi_max: float
    max_lambda2: float
    points: tuple

    @property
    def optimal_values(self) -> np.ndarray:
        return np.array([p.r_tot_reduced for p in self.points if p.feasible])


def max_feasible_psi(prob: DesignProblem, gamma: float, psi_step: float = 1e-3,
                     stride: int = 1, include_max: bool = True,
                     config: SolverConfig = SolverConfig()) -> SweepResult:
    """Largest multiple of ``psi_step`` for which the cohesion-constrained
    problem is feasible, plus optimal values along the psi grid.

    Feasibility at psi is equivalent to max lambda_2 >= psi ||B||_2 / sin(gamma),
    so psi_max follows from a single lambda_2 maximization. ``stride`` thins
    the grid of optimal values; the point at psi_max is always included
    when ``include_max`` is set.
    """
    if not 0 < gamma < np.pi / 2:
        raise InvalidParameter("gamma must lie in (0, pi/2)")
    if psi_step <= 0:
        raise InvalidParameter("psi_step must be positive")
    spec = prob.cohesion_spec(gamma, 0.0)
    lmax = maximize_lambda2(prob, config)
    psi_cap = lmax.value * np.sin(gamma) / spec.b_norm
    n_steps = int(np.floor(psi_cap / psi_step * (1 + 1e-12)))
    # guard the floor against the solver's own tolerance
    while n_steps > 0 and lmi_threshold(spec.with_psi(n_steps * psi_step)) > lmax.value + config.infeasibility_tol:
        n_steps -= 1
    psi_max = n_steps * psi_step
    grid = list(range(stride, n_steps + 1, stride)) if stride > 0 else []
    if include_max and n_steps > 0 and (not grid or grid[-1] != n_steps):
        grid.append(n_steps)
    points = []
    for i in grid:
        psi = i * psi_step
        try:
            res = solve_p2(prob.with_cohesion(spec.with_psi(psi)), config)
            points.append(SweepPoint(gamma, psi, True, res.objective, res.r_tot_reduced))
        except Infeasible:
            points.append(SweepPoint(gamma, psi, False, np.nan, np.nan))
    return SweepResult(gamma, psi_max, lmax.value, tuple(points))


def allocate_proportional(g: PowerGraph, alpha: float) -> np.ndarray:
    _check_budget(alpha)
    w = g.weights
    return w * (alpha / w.sum())


def allocate_uniform(g: PowerGraph, alpha: float) -> np.ndarray:
    _check_budget(alpha)
    m = len(g.edges)
    return np.full(m, alpha / m)


def allocate_random_dirichlet(g: PowerGraph, alpha: float, seed: int) -> np.ndarray:
    _check_budget(alpha)
    v = np.random.default_rng(seed).dirichlet(np.ones(len(g.edges)))
    return alpha * v / v.sum()


def _check_budget(alpha):
    if not (alpha >= 0 and np.isfinite(alpha)):
        raise InvalidParameter(f"budget must be finite and nonnegative, got {alpha}")


BASELINES = {
    "proportional": allocate_proportional,
    "uniform": allocate_uniform,
}


def design_problem(g: PowerGraph, alpha: float, beta: float = 1.0,
                   gamma: float | None = None, psi: float | None = None,
                   rewire: bool = False,
                   candidate_edges: Sequence | None = None) -> DesignProblem:
    """Convenience constructor used by the command line and scripts."""
    prob = DesignProblem(g, 0.0 if rewire else alpha, candidate_edges=candidate_edges,
                         beta=beta, allow_negative=rewire)
    if (gamma is None) != (psi is None):
        raise InvalidParameter("gamma and psi must be given together")
    if gamma is not None:
        prob = prob.with_cohesion(prob.cohesion_spec(gamma, psi))
    return prob
