from types import SimpleNamespace

import numpy as np
import pytest

from lgks_response import (GridTooCoarse, NonDecayingResponse, ResponseTrace, cumulative_response,
                           expectation, finite_difference_oracle, first_order_problem,
                           integrated_response, response_function, stationary_first_order_state,
                           steady_state, steady_state_response)
from lgks_response.core import random_hermitian
from lgks_response.response import default_tau_grid, resolved_tau_grid
from lgks_response.verification import random_eigenvector_model


def synthetic(tau, w=3.0):
    y = np.exp(-tau) * np.cos(w * tau)
    return ResponseTrace(tau, y, 2 * y, 3 * y)


def exact_integral(t, w=3.0):
    # int_0^t e^-s cos(ws) ds
    return (1 + np.exp(-t) * (w * np.sin(w * t) - np.cos(w * t))) / (1 + w * w)


def test_integrated_and_cumulative():
    tr = synthetic(np.linspace(0, 10, 4001))
    P11, P12 = integrated_response(tr, 2.5)
    assert P11 == pytest.approx(exact_integral(2.5), abs=1e-9)
    assert P12 == pytest.approx(2 * exact_integral(2.5), abs=1e-9)
    c11, _ = cumulative_response(tr)
    assert np.allclose(c11, exact_integral(tr.tau_grid), atol=1e-9)
    assert integrated_response(tr, 0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        integrated_response(tr, 11.0)


def test_coarse_grid_detected():
    tr = synthetic(np.linspace(0, 10, 41), w=6.0)
    with pytest.raises(GridTooCoarse):
        integrated_response(tr, 10.0)


def test_steady_state_response_with_tail():
    tr = synthetic(np.linspace(0, 25, 20001))
    P11, P12 = steady_state_response(tr)
    assert P11 == pytest.approx(1 / 10, abs=1e-9)
    tau = np.linspace(0, 30, 6001)
    y = np.exp(-0.5 * tau)
    P, _ = steady_state_response(ResponseTrace(tau, y, y, 2 * y))
    assert P == pytest.approx(2.0, rel=1e-7)
    with pytest.raises(NonDecayingResponse):
        steady_state_response(synthetic(np.linspace(0, 3, 3001)))


def test_response_matches_stationary_shift():
    H0, V, baths = random_eigenvector_model()
    prob = first_order_problem(H0, V, baths, zero_frequency="drop")
    pi0 = steady_state(prob.L0)
    A = random_hermitian(4, np.random.default_rng(5))
    tau = resolved_tau_grid(prob.L0, 12 / 0.05, per_radian=30)
    tr = response_function(A, prob.L0, prob.L1, pi0, tau)
    P11, P12 = steady_state_response(tr)
    pi1 = stationary_first_order_state(prob.L0, prob.L1, pi0)
    assert P11 + P12 == pytest.approx(expectation(pi1, A).real, abs=1e-7)
    scen = SimpleNamespace(H0=H0, V=V, baths=baths)
    est, err = finite_difference_oracle(scen, A, [1e-2, 3e-3, 1e-3], mode="global", zero_frequency="drop")
    assert est == pytest.approx(P11 + P12, abs=1e-6)


def test_rk4_and_exact_agree():
    H0, V, baths = random_eigenvector_model()
    prob = first_order_problem(H0, V, baths, zero_frequency="drop")
    pi0 = steady_state(prob.L0)
    A = random_hermitian(4, np.random.default_rng(6))
    tau = np.linspace(0, 5, 101)
    a = response_function(A, prob.L0, prob.L1, pi0, tau, method="exact")
    b = response_function(A, prob.L0, prob.L1, pi0, tau, method="rk4")
    assert np.allclose(a.phi11, b.phi11, atol=1e-9)
    assert np.allclose(a.phi12, b.phi12, atol=1e-9)
    assert np.allclose(a.phi_total, a.phi11 + a.phi12)


def test_default_grid_and_oracle_errors():
    H0, V, baths = random_eigenvector_model()
    prob = first_order_problem(H0, V, baths, zero_frequency="drop")
    g = default_tau_grid(prob.L0)
    assert len(g) == 2000 and g[0] == 0
    scen = SimpleNamespace(H0=H0, V=V, baths=baths)
    with pytest.raises(ValueError):
        finite_difference_oracle(scen, np.eye(4), [1e-3, 2e-3, 3e-3])
    with pytest.raises(ValueError):
        finite_difference_oracle(scen, np.eye(4), [1e-3, 1e-2, 1e-1], mode="other")
