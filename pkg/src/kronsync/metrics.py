"""Closed-form transient cost of the Kron-reduced swing dynamics.

A step disturbance ``u0`` on identical generators (inertia ``m``, damping
``d``) coupled through ``L_red = V diag(lam) V^T`` produces generator
frequencies

    omega(t) = sum_i v_i h_i(t) (v_i^T u0),

where ``h_i`` is the impulse response of ``1 / (m s^2 + d s + lam_i)``. The
first mode (``lam_1 = 0``) is the common-mode drift; the remaining modes make
up the transient component whose squared L2 norm is
``(1/2d) sum_{i>=2} (v_i^T u0)^2 / lam_i``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum, InvalidParameter
from .graph_core import EigenDecomposition, eigendecompose

SPECTRUM_TOL = 1e-9


@dataclass(frozen=True)
class ModalSystem:
    k: int
    eigen: EigenDecomposition
    m: float
    d: float
    sigma: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.d > 0):
            raise InvalidParameter("m and d must be positive")
        if self.sigma < 0:
            raise InvalidParameter("sigma must be nonnegative")
        lam = self.eigen.eigenvalues
        if len(lam) != self.k:
            raise InvalidParameter("eigen decomposition does not match k")
        scale = max(1.0, abs(lam[-1]))
        if abs(lam[0]) > SPECTRUM_TOL * scale:
            raise DegenerateSpectrum(f"smallest eigenvalue {lam[0]:.3e} is not zero")
        v1 = self.eigen.eigenvectors[:, 0]
        if abs(abs(v1.sum()) / np.sqrt(self.k) - 1.0) > 1e-8:
            raise DegenerateSpectrum("kernel eigenvector is not parallel to 1")

    @classmethod
    def from_reduced_laplacian(cls, L_red, m=1.0, d=1.0, sigma=1.0) -> "ModalSystem":
        L_red = np.asarray(L_red, dtype=float)
        return cls(L_red.shape[0], eigendecompose(L_red), m, d, sigma)

    @property
    def nonzero_eigenvalues(self) -> np.ndarray:
        lam = self.eigen.eigenvalues[1:]
        scale = max(1.0, abs(self.eigen.eigenvalues[-1]))
        if lam.size and lam[0] <= SPECTRUM_TOL * scale:
            raise DegenerateSpectrum(f"lambda_2 = {lam[0]:.3e} is not positive")
        return lam

    def modal_coefficients(self, u0) -> np.ndarray:
        """z0 = V_perp^T u0."""
        u0 = np.asarray(u0, dtype=float)
        if u0.shape[-1] != self.k:
            raise InvalidParameter(f"u0 must have length {self.k}")
        return u0 @ self.eigen.eigenvectors[:, 1:]


@dataclass(frozen=True)
class TransientDecomposition:
    time_grid: np.ndarray | None
    omega_bar: np.ndarray
    omega_tilde: np.ndarray
    modal_coeffs: np.ndarray | None = None


def transient_l2_closed_form(sys: ModalSystem, u0) -> float | np.ndarray:
    """Squared L2 norm of the transient frequency component.

    ``u0`` may be a batch of shape ``(N, k)``; a vector of norms is returned.
    """
    lam = sys.nonzero_eigenvalues
    z = sys.modal_coefficients(u0)
    return (z ** 2 / lam).sum(axis=-1) / (2.0 * sys.d)


def expected_transient_l2(sys: ModalSystem, r_tot: float) -> float:
    """E||omega_tilde||^2 = sigma^2 R_tot / (2 d k) for u0 ~ N(0, sigma^2 I)."""
    if r_tot < 0:
        raise InvalidParameter("total effective resistance must be nonnegative")
    return sys.sigma ** 2 * r_tot / (2.0 * sys.d * sys.k)


def modal_impulse_l2(d: float, lambda_i: float) -> float:
    if lambda_i <= 0:
        raise DegenerateSpectrum(f"mode eigenvalue must be positive, got {lambda_i}")
    if d <= 0:
        raise InvalidParameter("d must be positive")
    return 1.0 / (2.0 * d * lambda_i)


def _roots(m, d, lam):
    disc = d * d - 4.0 * m * lam
    return disc, (-d + np.sqrt(complex(disc))) / (2 * m), (-d - np.sqrt(complex(disc))) / (2 * m)


def _repeated(disc, m, d):
    return abs(disc) <= 1e-12 * d * d


def modal_step_response(m: float, d: float, lambda_i: float, t) -> np.ndarray:
    """Frequency response of one mode to a unit step, i.e. the impulse
    response of 1 / (m s^2 + d s + lambda_i)."""
    t = np.asarray(t, dtype=float)
    if lambda_i < 0:
        raise DegenerateSpectrum("mode eigenvalue must be nonnegative")
    if lambda_i == 0:
        return -np.expm1(-d * t / m) / d
    disc, r1, r2 = _roots(m, d, lambda_i)
    if _repeated(disc, m, d):
        r = -d / (2 * m)
        return t * np.exp(r * t) / m
    if disc < 0:
        wd = np.sqrt(-disc) / (2 * m)
        return np.exp(-d * t / (2 * m)) * np.sin(wd * t) / (m * wd)
    r1, r2 = r1.real, r2.real
    return (np.exp(r1 * t) - np.exp(r2 * t)) / (m * (r1 - r2))


def modal_angle_response(m: float, d: float, lambda_i: float, t) -> np.ndarray:
    """Time integral of :func:`modal_step_response` from 0 to t."""
    t = np.asarray(t, dtype=float)
    if lambda_i == 0:
        return t / d + m * np.expm1(-d * t / m) / d ** 2
    disc, r1, r2 = _roots(m, d, lambda_i)
    if _repeated(disc, m, d):
        r = -d / (2 * m)
        return (np.exp(r * t) * (r * t - 1.0) + 1.0) / (m * r * r)
    if disc < 0:
        a = d / (2 * m)
        wd = np.sqrt(-disc) / (2 * m)
        e = np.exp(-a * t)
        return (1.0 - e * (np.cos(wd * t) + (a / wd) * np.sin(wd * t))) / lambda_i
    r1, r2 = r1.real, r2.real
    return 1.0 / lambda_i + (np.exp(r1 * t) / r1 - np.exp(r2 * t) / r2) / (m * (r1 - r2))


def slowest_decay_rate(m: float, d: float, lambdas) -> float:
    """Smallest exponential decay rate among the modes with lambda > 0."""
    rates = []
    for lam in np.atleast_1d(lambdas):
        disc = d * d - 4 * m * lam
        if disc < 0:
            rates.append(d / (2 * m))
        else:
            rates.append((d - np.sqrt(disc)) / (2 * m))
    return float(min(rates))


def transient_horizon(sys: ModalSystem, u0=None, tol: float = 1e-8) -> float:
    """Time T after which ||omega_tilde(t)|| <= tol for all t >= T.

    Uses the envelope |h_i(t)| <= t exp(-rate t) / m valid in the under-,
    over- and critically damped cases.
    """
    lam = sys.nonzero_eigenvalues
    rate = slowest_decay_rate(sys.m, sys.d, lam)
    amp = 1.0 if u0 is None else float(np.abs(sys.modal_coefficients(u0)).sum())
    amp = max(amp, 1e-300) / sys.m
    T = 1.0 / rate  # envelope t exp(-rate t) peaks here and decreases afterwards
    while amp * T * np.exp(-rate * T) > tol:
        T *= 1.25
    return float(T)


def decompose_frequency(omega_series, eigen: EigenDecomposition | None = None,
                        times=None, u0=None) -> TransientDecomposition:
    """Split omega(t) into the common mode omega_bar(t) 1 and the transient
    remainder. ``omega_series`` has shape ``(T, k)``."""
    omega = np.asarray(omega_series, dtype=float)
    if omega.ndim != 2:
        raise InvalidParameter("omega_series must have shape (T, k)")
    k = omega.shape[1]
    if eigen is not None and eigen.eigenvalues.shape[0] != k:
        raise InvalidParameter("eigen decomposition does not match series width")
    if times is not None and len(times) != omega.shape[0]:
        raise InvalidParameter("time grid length does not match series length")
    bar = omega.mean(axis=1)
    tilde = omega - bar[:, None]
    z0 = None
    if u0 is not None and eigen is not None:
        z0 = np.asarray(u0, dtype=float) @ eigen.eigenvectors[:, 1:]
    return TransientDecomposition(None if times is None else np.asarray(times), bar, tilde, z0)
