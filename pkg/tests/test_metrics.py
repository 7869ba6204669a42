import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from conftest import graphs
from kronsync.errors import DegenerateSpectrum, InvalidParameter
from kronsync.graph_core import EigenDecomposition, build_laplacian, kron_reduce
from kronsync.metrics import (
    ModalSystem,
    decompose_frequency,
    expected_transient_l2,
    modal_angle_response,
    modal_impulse_l2,
    modal_step_response,
    slowest_decay_rate,
    transient_horizon,
    transient_l2_closed_form,
)


def reduced_system(g, m=1.0, d=1.0, sigma=1.0):
    L_red = kron_reduce(build_laplacian(g), g.generators)
    return ModalSystem.from_reduced_laplacian(L_red, m, d, sigma)


def test_two_node_closed_form():
    sys = ModalSystem.from_reduced_laplacian([[2.0, -2.0], [-2.0, 2.0]], 1.0, 1.0)
    assert transient_l2_closed_form(sys, [1.0, -1.0]) == pytest.approx(0.25)
    assert transient_l2_closed_form(sys, [3.0, 3.0]) == pytest.approx(0.0, abs=1e-15)


def test_closed_form_batched(case30):
    sys = reduced_system(case30)
    U = np.random.default_rng(0).standard_normal((7, 6))
    batch = transient_l2_closed_form(sys, U)
    assert batch.shape == (7,)
    np.testing.assert_allclose(batch, [transient_l2_closed_form(sys, u) for u in U], rtol=1e-14)


def test_expected_transient_examples(path_graph, case30):
    sys = reduced_system(path_graph)
    assert expected_transient_l2(sys, 0.5) == pytest.approx(0.125)
    assert expected_transient_l2(reduced_system(path_graph, sigma=0.0), 0.5) == 0.0
    assert expected_transient_l2(reduced_system(case30), 5.46) == pytest.approx(0.455)
    with pytest.raises(InvalidParameter):
        expected_transient_l2(sys, -1.0)


def test_expected_transient_monte_carlo(path_graph):
    sys = reduced_system(path_graph)
    U = np.random.default_rng(11).standard_normal((100_000, 2))
    vals = transient_l2_closed_form(sys, U)
    se = vals.std(ddof=1) / np.sqrt(len(vals))
    assert abs(vals.mean() - 0.125) <= 3 * se


def test_modal_impulse_examples():
    assert modal_impulse_l2(1.0, 4.0) == pytest.approx(0.125)
    assert modal_impulse_l2(2.0, 1.0) == pytest.approx(0.25)
    with pytest.raises(DegenerateSpectrum):
        modal_impulse_l2(1.0, 0.0)


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.05, 20.0))
def test_modal_impulse_matches_quadrature(m, d, lam):
    T = 1.0 / slowest_decay_rate(m, d, [lam])
    while T * np.exp(-slowest_decay_rate(m, d, [lam]) * T) / m > 1e-10:
        T *= 1.5
    # geometric breakpoints resolve both the fast and the slow time scale
    knots = [0.0]
    step = 0.1 * min(m / d, np.sqrt(m / lam))
    while knots[-1] < T:
        knots.append(min(T, knots[-1] + step))
        step *= 2
    val = sum(quad(lambda t: modal_step_response(m, d, lam, t) ** 2, a, b,
                   epsabs=1e-15, epsrel=1e-11, limit=200)[0] for a, b in zip(knots, knots[1:]))
    assert val == pytest.approx(modal_impulse_l2(d, lam), rel=1e-6)


def test_kernel_mode_final_value():
    assert modal_step_response(1.0, 1.0, 0.0, 60.0) == pytest.approx(1.0)


def test_underdamped_decay_rate():
    m, d, lam = 1.0, 0.4, 3.0
    assert slowest_decay_rate(m, d, [lam]) == pytest.approx(d / (2 * m))
    t = np.linspace(0, 30, 3001)
    h = modal_step_response(m, d, lam, t)
    assert np.any(h < 0)  # oscillates
    assert np.all(np.abs(h) <= np.exp(-d * t / (2 * m)) / (m * np.sqrt(lam / m - (d / 2 / m) ** 2)) + 1e-15)


@pytest.mark.parametrize("m,d,lam", [(1.0, 1.0, 4.0), (1.0, 4.0, 1.0), (1.0, 2.0, 1.0), (2.0, 0.5, 0.3),
                                     (0.5, 3.0, 0.0)])
def test_responses_match_ode(m, d, lam):
    t = np.linspace(0, 15, 301)

    def rhs(_, y):
        x, v = y
        return [v, (1.0 - d * v - lam * x) / m]

    sol = solve_ivp(rhs, (0, 15), [0.0, 0.0], t_eval=t, rtol=1e-12, atol=1e-14, method="DOP853")
    np.testing.assert_allclose(modal_step_response(m, d, lam, t), sol.y[1], atol=1e-8)
    np.testing.assert_allclose(modal_angle_response(m, d, lam, t), sol.y[0], atol=1e-8)


@given(graphs(max_n=8, min_k=2), st.integers(0, 2**31))
def test_shift_invariance(g, seed):
    sys = reduced_system(g)
    u = np.random.default_rng(seed).standard_normal(g.k)
    assert transient_l2_closed_form(sys, u + 3.7) == pytest.approx(
        transient_l2_closed_form(sys, u), rel=1e-10, abs=1e-14)


def test_rotated_basis_invariance():
    # K_3 has a repeated nonzero eigenvalue; any orthonormal basis of it works
    L = 3 * np.eye(3) - np.ones((3, 3))
    base = ModalSystem.from_reduced_laplacian(L)
    V = base.eigen.eigenvectors.copy()
    th = 0.7
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    V[:, 1:] = V[:, 1:] @ R
    rotated = ModalSystem(3, EigenDecomposition(base.eigen.eigenvalues, V), 1.0, 1.0)
    u = np.array([0.3, -1.2, 2.0])
    assert transient_l2_closed_form(rotated, u) == pytest.approx(transient_l2_closed_form(base, u), rel=1e-12)


def test_decompose_frequency():
    t = np.linspace(0, 1, 5)
    const = np.outer(np.sin(t), np.ones(3))
    dec = decompose_frequency(const, times=t)
    np.testing.assert_allclose(dec.omega_bar, np.sin(t))
    np.testing.assert_allclose(dec.omega_tilde, 0, atol=1e-15)
    zero_mean = np.outer(t, [1.0, -2.0, 1.0])
    np.testing.assert_allclose(decompose_frequency(zero_mean).omega_bar, 0, atol=1e-15)
    with pytest.raises(InvalidParameter):
        decompose_frequency(np.zeros(4))


def test_degenerate_spectrum_rejected():
    with pytest.raises(DegenerateSpectrum):
        ModalSystem.from_reduced_laplacian(np.eye(2))
    with pytest.raises(DegenerateSpectrum):
        ModalSystem.from_reduced_laplacian(np.zeros((2, 2)))
    # a disconnected reduced graph has lambda_2 = 0
    L = np.zeros((3, 3))
    L[:2, :2] = [[1.0, -1.0], [-1.0, 1.0]]
    with pytest.raises(DegenerateSpectrum):
        transient_l2_closed_form(ModalSystem.from_reduced_laplacian(L), [1.0, 0.0, 0.0])


def test_transient_horizon_bounds_tail(case30):
    sys = reduced_system(case30)
    u = np.random.default_rng(2).standard_normal(6)
    T = transient_horizon(sys, u, tol=1e-8)
    z = sys.modal_coefficients(u)
    lam = sys.nonzero_eigenvalues
    t = np.linspace(T, 3 * T, 2000)
    tail = np.stack([modal_step_response(1.0, 1.0, l, t) for l in lam], axis=1) @ np.abs(z)
    assert np.abs(tail).max() <= 1e-8
