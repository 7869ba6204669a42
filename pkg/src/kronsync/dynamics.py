"""Time-domain simulation of the swing equation on generator nodes with
algebraic power balance at load nodes:

    m_i  dw_i/dt = p_i + u_i - d_i w_i - sum_j a_ij sin(delta_i - delta_j),   i in G
    0            = p_i - sum_j a_ij sin(delta_i - delta_j),                   i in L

All integrators work on a batch of ``S`` independent disturbances at once;
state arrays have shape ``(S, k)`` or ``(S, n - k)``.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import AlgebraicSolveFailure, InvalidParameter
from .graph_core import PowerGraph, build_laplacian, kron_reduce
from .metrics import ModalSystem, decompose_frequency, modal_angle_response, modal_step_response
from .sync_cert import incremental_inf_norm, solve_sync_state

INTEGRATORS = ("rk4_semi_explicit", "implicit_trapezoid")


@dataclass(frozen=True)
class SimulationConfig:
    dt: float = 0.01
    horizon: float = 50.0
    newton_tol: float = 1e-10
    newton_max_iter: int = 30
    integrator: str = "rk4_semi_explicit"

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameter("dt must be positive")
        if not self.horizon >= self.dt:
            raise InvalidParameter("horizon must be at least one step")
        if not 0 < self.newton_tol <= 1e-8:
            raise InvalidParameter("newton_tol must lie in (0, 1e-8]")
        if self.newton_max_iter < 1:
            raise InvalidParameter("newton_max_iter must be positive")
        if self.integrator not in INTEGRATORS:
            raise InvalidParameter(f"integrator must be one of {INTEGRATORS}")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)


@dataclass
class Trajectory:
    times: np.ndarray
    delta_gen: np.ndarray
    omega_gen: np.ndarray
    delta_load: np.ndarray | None = None
    converged: np.ndarray | None = None


class _Network:
    """Generator/load split of a graph, with batched flow evaluation."""

    def __init__(self, g: PowerGraph, m=None, d=None):
        self.g = g
        self.n, self.k = g.n, g.k
        self.gen = np.array(g.generators)
        self.load = np.array(g.loads, dtype=int)
        self.src, self.dst, self.w = g.sources, g.targets, g.weights
        self.m = np.broadcast_to(np.asarray(g.m if m is None else m, float), (self.k,)).copy()
        self.d = np.broadcast_to(np.asarray(g.d if d is None else d, float), (self.k,)).copy()
        if np.any(self.m <= 0) or np.any(self.d <= 0):
            raise InvalidParameter("inertia and damping must be positive")
        # signed edge-to-node map: net flow out of node = f @ K
        K = np.zeros((len(self.w), self.n))
        K[np.arange(len(self.w)), self.src] = 1.0
        K[np.arange(len(self.w)), self.dst] -= 1.0
        self.K = K

    def full(self, dg, dl):
        delta = np.empty((dg.shape[0], self.n))
        delta[:, self.gen] = dg
        delta[:, self.load] = dl
        return delta

    def flows(self, delta):
        return (self.w * np.sin(delta[:, self.src] - delta[:, self.dst])) @ self.K

    def jacobian(self, delta):
        """Batched Laplacian with weights a_ij cos(delta_i - delta_j)."""
        c = self.w * np.cos(delta[:, self.src] - delta[:, self.dst])
        return (self.K.T[None, :, :] * c[:, None, :]) @ self.K


class _LoadSolver:
    """Chord-Newton iteration for the load angles.

    Each sample keeps a frozen inverse of its load-load Jacobian block and
    the linear sensitivity d(delta_L)/d(delta_G); both are refreshed for the
    samples that needed more than ``REFRESH_AFTER`` iterations.
    """

    REFRESH_AFTER = 2

    def __init__(self, net: _Network, p, cfg: SimulationConfig, S: int):
        self.net, self.cfg = net, cfg
        self.pl = p[net.load]
        nl, k = net.load.size, net.k
        self.inv = np.zeros((S, nl, nl))
        self.sens = np.zeros((S, nl, k))

    def refresh(self, dg, dl, rows):
        net = self.net
        if not rows.size:
            return
        J = net.jacobian(net.full(dg[rows], dl[rows]))
        JLL = J[:, net.load][:, :, net.load]
        JLG = J[:, net.load][:, :, net.gen]
        try:
            inv = np.linalg.inv(JLL)
        except np.linalg.LinAlgError:
            inv = np.stack([np.linalg.pinv(A) for A in JLL])
        self.inv[rows] = inv
        self.sens[rows] = -inv @ JLG

    def predict(self, dl, dg_from, dg_to):
        if not dl.size:
            return dl
        return dl + (self.sens @ (dg_to - dg_from)[..., None])[..., 0]

    def solve(self, dg, dl, active=None):
        """Returns (dl, converged mask); inactive samples pass through."""
        net, cfg = self.net, self.cfg
        S = dg.shape[0]
        if net.load.size == 0:
            return dl, np.ones(S, bool) if active is None else active.copy()
        dl = dl.copy()
        todo = np.ones(S, bool) if active is None else active.copy()
        ok = np.zeros(S, bool)
        for it in range(cfg.newton_max_iter + 1):
            idx = np.nonzero(todo)[0]
            if not idx.size:
                break
            r = self.pl - net.flows(net.full(dg[idx], dl[idx]))[:, net.load]
            done = np.abs(r).max(axis=1) <= cfg.newton_tol
            ok[idx[done]] = True
            todo[idx[done]] = False
            idx, r = idx[~done], r[~done]
            if not idx.size or it == cfg.newton_max_iter:
                break
            if it == self.REFRESH_AFTER:
                self.refresh(dg, dl, idx)
            dl[idx] += (self.inv[idx] @ r[..., None])[..., 0]
        good = ok & np.isfinite(dl).all(axis=1)
        return dl, good


def solve_load_algebra(g: PowerGraph, delta_gen, p=None, guess=None,
                       cfg: SimulationConfig = SimulationConfig()) -> np.ndarray:
    """Load angles balancing every load node for fixed generator angles."""
    net = _Network(g)
    dg = np.atleast_2d(np.asarray(delta_gen, float))
    p = g.p() if p is None else np.asarray(p, float)
    if guess is None:
        guess = _linear_load_guess(net, dg, p)
    guess = np.atleast_2d(np.asarray(guess, float))
    solver = _LoadSolver(net, p, cfg, dg.shape[0])
    solver.refresh(dg, guess, np.arange(dg.shape[0]))
    dl, ok = solver.solve(dg, guess)
    if not ok.all():
        raise AlgebraicSolveFailure("load power balance did not converge")
    return dl[0] if np.ndim(delta_gen) == 1 else dl


def _linear_load_guess(net: _Network, dg, p):
    if net.load.size == 0:
        return np.zeros((dg.shape[0], 0))
    L = build_laplacian(net.g)
    LLL = L[np.ix_(net.load, net.load)]
    LLG = L[np.ix_(net.load, net.gen)]
    rhs = p[net.load][None, :] - dg @ LLG.T
    return np.linalg.solve(LLL, rhs.T).T


class _Integrator:
    def __init__(self, net: _Network, p, U, cfg: SimulationConfig):
        self.net, self.cfg = net, cfg
        self.p = p
        self.drive = p[net.gen][None, :] + U
        S = U.shape[0]
        self.dg = np.zeros((S, net.k))
        self.w = np.zeros((S, net.k))
        self.loads = _LoadSolver(net, p, cfg, S)
        guess = _linear_load_guess(net, self.dg, p)
        self.loads.refresh(self.dg, guess, np.arange(S))
        self.dl, ok = self.loads.solve(self.dg, guess)
        self.ok = ok
        self.fail_time = np.where(ok, np.nan, 0.0)
        self.t = 0.0

    def accel(self, dg, w, dl):
        flows = self.net.flows(self.net.full(dg, dl))[:, self.net.gen]
        return (self.drive - self.net.d * w - flows) / self.net.m

    def step_rk4(self):
        h = self.cfg.dt
        y0g, y0w, y0l = self.dg, self.w, self.dl
        kg, kw = [y0w], [self.accel(y0g, y0w, y0l)]
        ok = self.ok.copy()
        for c in (0.5, 0.5, 1.0):
            g_, w_ = y0g + c * h * kg[-1], y0w + c * h * kw[-1]
            dl, good = self.loads.solve(g_, self.loads.predict(y0l, y0g, g_), ok)
            ok &= good
            kg.append(w_)
            kw.append(self.accel(g_, w_, dl))
        new_g = y0g + h / 6 * (kg[0] + 2 * kg[1] + 2 * kg[2] + kg[3])
        new_w = y0w + h / 6 * (kw[0] + 2 * kw[1] + 2 * kw[2] + kw[3])
        new_l, good = self.loads.solve(new_g, self.loads.predict(y0l, y0g, new_g), ok)
        self._commit(new_g, new_w, new_l, ok & good)

    def step_trapezoid(self):
        h, net, cfg = self.cfg.dt, self.net, self.cfg
        act = self.ok.copy()
        g0, w0, l0 = self.dg, self.w, self.dl
        a0 = self.accel(g0, w0, l0)
        w1, l1 = w0 + h * a0, l0.copy()
        k, nl = net.k, net.load.size
        m, d = net.m, net.d
        conv = np.zeros_like(act)
        todo = act.copy()
        for _ in range(cfg.newton_max_iter):
            if not todo.any():
                break
            idx = np.nonzero(todo)[0]
            g1 = g0[idx] + 0.5 * h * (w0[idx] + w1[idx])
            delta = net.full(g1, l1[idx])
            F = net.flows(delta)
            r1 = m * (w1[idx] - w0[idx]) - 0.5 * h * (
                self.drive[idx] - d * w1[idx] - F[:, net.gen] + m * a0[idx])
            r2 = self.p[net.load] - F[:, net.load]
            res = np.concatenate([r1, r2], axis=1)
            done = np.abs(res).max(axis=1) <= cfg.newton_tol
            conv[idx[done]] = True
            todo[idx[done]] = False
            if done.all():
                break
            sel = ~done
            Kj = net.jacobian(delta[sel])
            Kgg = Kj[:, net.gen][:, :, net.gen]
            Kgl = Kj[:, net.gen][:, :, net.load]
            Klg = Kj[:, net.load][:, :, net.gen]
            Kll = Kj[:, net.load][:, :, net.load]
            A = np.zeros((sel.sum(), k + nl, k + nl))
            A[:, :k, :k] = np.diag(m + 0.5 * h * d) + 0.25 * h * h * Kgg
            A[:, :k, k:] = 0.5 * h * Kgl
            A[:, k:, :k] = -0.5 * h * Klg
            A[:, k:, k:] = -Kll
            try:
                step = np.linalg.solve(A, -res[sel][..., None])[..., 0]
            except np.linalg.LinAlgError:
                break
            w1[idx[sel]] += step[:, :k]
            l1[idx[sel]] += step[:, k:]
        ok = act & conv & np.isfinite(w1).all(axis=1)
        g1 = g0 + 0.5 * h * (w0 + w1)
        self._commit(g1, w1, l1, ok)

    def _commit(self, g, w, l, ok):
        failed_now = self.ok & ~ok
        self.fail_time[failed_now] = self.t + self.cfg.dt
        self.ok = ok
        # failed samples are frozen at their last good state
        self.dg = np.where(ok[:, None], g, self.dg)
        self.w = np.where(ok[:, None], w, self.w)
        self.dl = np.where(ok[:, None], l, self.dl) if l.size else l

    def run(self, store: bool):
        cfg = self.cfg
        step = self.step_rk4 if cfg.integrator == "rk4_semi_explicit" else self.step_trapezoid
        S, k = self.dg.shape
        n_steps = cfg.steps
        if store:
            G = np.empty((n_steps + 1, S, k))
            W = np.empty((n_steps + 1, S, k))
            Ld = np.empty((n_steps + 1, S, self.dl.shape[1]))
            conv = np.empty((n_steps + 1, S), bool)
            G[0], W[0], Ld[0], conv[0] = self.dg, self.w, self.dl, self.ok
        # streaming trapezoid sums of |w|^2 and |w - mean(w)|^2
        full = np.zeros(S)
        tilde = np.zeros(S)

        def sq(w):
            wt = w - w.mean(axis=1, keepdims=True)
            return (w * w).sum(axis=1), (wt * wt).sum(axis=1)

        prev = sq(self.w)
        self.t = 0.0
        for i in range(1, n_steps + 1):
            step()
            self.t = i * cfg.dt
            cur = sq(self.w)
            full += 0.5 * cfg.dt * (prev[0] + cur[0])
            tilde += 0.5 * cfg.dt * (prev[1] + cur[1])
            prev = cur
            if store:
                G[i], W[i], Ld[i], conv[i] = self.dg, self.w, self.dl, self.ok
        out = {"norm_omega": np.sqrt(full), "norm_omega_tilde": np.sqrt(tilde), "ok": self.ok.copy(),
               "fail_time": self.fail_time}
        if store:
            out.update(delta_gen=G, omega_gen=W, delta_load=Ld, converged=conv)
        return out


def _check_injections(g: PowerGraph, p):
    p = g.p() if p is None else np.asarray(p, float)
    if p.shape != (g.n,):
        raise InvalidParameter(f"p must have length {g.n}")
    if abs(p.sum()) > 1e-9 * max(1.0, np.abs(p).sum()):
        raise InvalidParameter("injections must be balanced")
    return p


def simulate_dae(g: PowerGraph, u0, p=None, cfg: SimulationConfig = SimulationConfig(),
                 m=None, d=None) -> Trajectory:
    """Integrate the swing/load-balance model from delta = 0, omega = 0 with
    a step disturbance ``u0`` on the generator injections."""
    p = _check_injections(g, p)
    net = _Network(g, m, d)
    u0 = np.asarray(u0, float)
    if u0.shape != (net.k,):
        raise InvalidParameter(f"u0 must have length {net.k}")
    out = _Integrator(net, p, u0[None, :], cfg).run(store=True)
    conv = out["converged"][:, 0]
    traj = Trajectory(cfg.times, out["delta_gen"][:, 0], out["omega_gen"][:, 0],
                      out["delta_load"][:, 0], conv)
    if not conv.all():
        first = int(np.argmin(conv))
        cut = Trajectory(traj.times[:first], traj.delta_gen[:first], traj.omega_gen[:first],
                         traj.delta_load[:first], conv[:first])
        raise AlgebraicSolveFailure("load power balance did not converge",
                                    float(cfg.times[first]), cut)
    return traj


def simulate_linear_reduced(L_red, m: float, d: float, u0,
                            cfg: SimulationConfig = SimulationConfig()) -> Trajectory:
    """Exact modal solution of m x'' + d x' = -L_red x + u0 from rest."""
    sys = ModalSystem.from_reduced_laplacian(L_red, m, d)
    V, lam = sys.eigen.eigenvectors, sys.eigen.eigenvalues.copy()
    lam[0] = 0.0
    z = V.T @ np.asarray(u0, float)
    t = cfg.times
    H = np.stack([modal_step_response(m, d, max(l, 0.0), t) for l in lam], axis=1)
    A = np.stack([modal_angle_response(m, d, max(l, 0.0), t) for l in lam], axis=1)
    return Trajectory(t, (A * z) @ V.T, (H * z) @ V.T)


def finite_horizon_l2(traj: Trajectory, component: str = "omega_tilde") -> float:
    """sqrt of the trapezoid integral of ||omega(t)||^2 (or of the transient
    component) over the trajectory's grid."""
    if component not in ("omega", "omega_tilde"):
        raise InvalidParameter("component must be 'omega' or 'omega_tilde'")
    t = np.asarray(traj.times, float)
    if len(t) > 2 and np.ptp(np.diff(t)) > 1e-9 * (t[-1] - t[0]):
        raise InvalidParameter("time grid is not uniform")
    w = np.asarray(traj.omega_gen, float)
    if component == "omega_tilde":
        w = decompose_frequency(w).omega_tilde
    return float(np.sqrt(np.trapezoid((w * w).sum(axis=1), t))) if len(t) > 1 else 0.0


def u0_hash(u0) -> str:
    return hashlib.sha256(np.ascontiguousarray(u0, dtype="<f8").tobytes()).hexdigest()[:16]


def sample_disturbances(k: int, N: int, sigma: float, seed: int) -> np.ndarray:
    """u0 samples with per-sample sub-seeds derived from (seed, index)."""
    return np.stack([sigma * np.random.default_rng([seed, i]).standard_normal(k)
                     for i in range(N)]) if N else np.zeros((0, k))


@dataclass
class MonteCarloReport:
    seed: int
    sample_count: int
    sigma: float
    reference: str
    u0_hashes: list
    norms_omega_tilde: dict
    norms_omega: dict
    failed: dict
    config: SimulationConfig = field(default_factory=SimulationConfig)

    @property
    def strategies(self) -> list:
        return list(self.norms_omega_tilde)

    def valid(self) -> np.ndarray:
        ok = np.ones(self.sample_count, bool)
        for f in self.failed.values():
            ok &= ~f
        return ok

    def comparison(self, baseline: str, metric: str = "omega_tilde") -> dict:
        """Reduction of the reference strategy against ``baseline``."""
        norms = self.norms_omega_tilde if metric == "omega_tilde" else self.norms_omega
        ok = self.valid()
        a, b = norms[self.reference][ok], norms[baseline][ok]
        if not ok.any():
            return {"mean_reduction_pct": float("nan"), "ratio_of_means_pct": float("nan"),
                    "win_rate": float("nan"), "samples": 0}
        pct = np.where(b > 0, 100.0 * (1.0 - a / np.where(b > 0, b, 1.0)), 0.0)
        wins = (a < b) + 0.5 * (a == b)
        return {
            "mean_reduction_pct": float(pct.mean()),
            "ratio_of_means_pct": float(100.0 * (1.0 - a.mean() / b.mean())) if b.mean() > 0 else 0.0,
            "win_rate": float(wins.mean()),
            "samples": int(ok.sum()),
        }

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "sample_count": self.sample_count,
            "sigma": self.sigma,
            "reference": self.reference,
            "dt": self.config.dt,
            "horizon": self.config.horizon,
            "integrator": self.config.integrator,
            "failed_samples": int((~self.valid()).sum()),
            "comparisons": {s: {m: self.comparison(s, m) for m in ("omega_tilde", "omega")}
                            for s in self.strategies if s != self.reference},
            "u0_hashes": list(self.u0_hashes),
        }

    def rows(self):
        for s in self.strategies:
            for i in range(self.sample_count):
                yield {"sample_index": i, "strategy": s,
                       "norm_omega_tilde": float(self.norms_omega_tilde[s][i]),
                       "norm_omega": float(self.norms_omega[s][i]), "seed": self.seed,
                       "u0_hash": self.u0_hashes[i], "failed": bool(self.failed[s][i])}


def monte_carlo_compare(variants: Mapping[str, PowerGraph], N: int = 500, sigma: float = 1.0,
                        seed: int = 0, cfg: SimulationConfig = SimulationConfig(),
                        reference: str | None = None, batch: int = 100) -> MonteCarloReport:
    """Simulate every variant on the same disturbance samples.

    Samples are integrated as a vectorized batch rather than in threads;
    each sample's draw depends only on (seed, index) so batching does not
    change results.
    """
    if not variants:
        raise InvalidParameter("no variants to compare")
    names = list(variants)
    reference = names[0] if reference is None else reference
    if reference not in variants:
        raise InvalidParameter(f"unknown reference strategy {reference!r}")
    first = variants[names[0]]
    for g in variants.values():
        if g.n != first.n or g.generators != first.generators or g.m != first.m or g.d != first.d:
            raise InvalidParameter("variants must share nodes, generators, m and d")
    if N < 0 or sigma < 0:
        raise InvalidParameter("N and sigma must be nonnegative")
    U = sample_disturbances(first.k, N, sigma, seed)
    tilde = {s: np.zeros(N) for s in names}
    full = {s: np.zeros(N) for s in names}
    failed = {s: np.zeros(N, bool) for s in names}
    for s in names:
        g = variants[s]
        net = _Network(g)
        p = np.zeros(g.n)
        for lo in range(0, N, batch):
            out = _Integrator(net, p, U[lo:lo + batch], cfg).run(store=False)
            tilde[s][lo:lo + batch] = out["norm_omega_tilde"]
            full[s][lo:lo + batch] = out["norm_omega"]
            failed[s][lo:lo + batch] = ~out["ok"]
    return MonteCarloReport(seed, N, sigma, reference, [u0_hash(u) for u in U],
                            tilde, full, failed, cfg)


def steady_state_cohesion_report(g: PowerGraph, p=None, u0=None, edges=None) -> float:
    """||delta*||_{E,inf} of the synchronized state after a step ``u0``.

    An unbalanced step drives the network to a common frequency offset
    sum(u0) / (k d); in the co-rotating frame each generator then sees
    u0_i - d * offset, which is balanced.
    """
    p = _check_injections(g, p)
    k = g.k
    u0 = np.zeros(k) if u0 is None else np.asarray(u0, float)
    if u0.shape != (k,):
        raise InvalidParameter(f"u0 must have length {k}")
    p_eff = p.copy()
    p_eff[list(g.generators)] += u0 - u0.mean()
    if not np.any(p_eff):
        return 0.0
    state = solve_sync_state(g, p_eff)
    return incremental_inf_norm(state.angles, g.edge_pairs if edges is None else edges)


def reduced_modal_system(g: PowerGraph) -> ModalSystem:
    L_red = kron_reduce(build_laplacian(g), g.generators)
    return ModalSystem.from_reduced_laplacian(L_red, g.m, g.d)
