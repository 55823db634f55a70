import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from lgks_response import (EigenvalueShiftPresent, Liouvillian, NotSteady, RegimeWarning,
                           UnresolvedDegeneracy, build_global_perturbed, build_local_perturbed,
                           classify_regime, eigendecompose_hermitian, expand_coupling_operators,
                           first_order_corrections, first_order_pipeline, first_order_state,
                           stationary_first_order_state, steady_state)
from lgks_response.core import random_density, random_hermitian, unvec, vec
from lgks_response.models import QubitScenario, build_qubit_scenario
from lgks_response.perturb import first_order_states
from lgks_response.verification import random_eigenvector_model


def model():
    H0, V, baths = random_eigenvector_model()
    L0, L1, exp = first_order_pipeline(H0, V, baths, zero_frequency="drop")
    return H0, V, baths, L0, L1, exp


def test_nondegenerate_corrections(rng):
    H0 = np.diag([0.0, 1.0, 2.5])
    V = random_hermitian(3, rng)
    exp = first_order_corrections(eigendecompose_hermitian(H0), V)
    assert np.allclose(exp.E1, np.diag(V).real)
    # residual of the first-order eigenpairs falls as delta^2
    r1, r2 = exp.eigenpair_residual(H0, 1e-3), exp.eigenpair_residual(H0, 1e-4)
    assert np.log10(r1 / r2) == pytest.approx(2.0, abs=0.05)


def test_degenerate_block_rotated():
    H0 = np.diag([0.0, 0.0, 1.0])
    V = np.array([[0, 1, 0], [1, 0, 0.3], [0, 0.3, 0]], dtype=complex)
    exp = first_order_corrections(eigendecompose_hermitian(H0), V)
    assert exp.degenerate_blocks == ((0, 1),)
    assert np.allclose(sorted(exp.E1[:2]), [-1, 1])
    assert exp.eigenpair_residual(H0, 1e-4) < 1e-7


def test_unresolved_degeneracy():
    H0 = np.diag([0.0, 0.0, 1.0])
    V = np.array([[0, 0, 1], [0, 0, 1], [1, 1, 0]], dtype=complex)
    with pytest.raises(UnresolvedDegeneracy):
        first_order_corrections(eigendecompose_hermitian(H0), V)


def test_level_shift_rejected():
    m = build_qubit_scenario(QubitScenario())
    exp = first_order_corrections(eigendecompose_hermitian(m.H0), m.V)
    with pytest.raises(EigenvalueShiftPresent):
        expand_coupling_operators(exp, m.L0.dissipators[0].decomposition)


def test_generator_expansion_is_second_order():
    H0, V, baths, L0, L1, _ = model()
    A0, A1 = L0.dense(), L1.dense()
    err = [np.linalg.norm(build_global_perturbed(H0, V, d, baths, zero_frequency="drop").dense()
                          - A0 - d * A1, 2) for d in (1e-3, 1e-4)]
    assert np.log10(err[0] / err[1]) == pytest.approx(2.0, abs=0.05)


def test_rho1_against_finite_difference():
    _, _, _, L0, L1, _ = model()
    pi0 = steady_state(L0)
    A0, A1 = L0.dense(), L1.dense()
    d, t = 1e-5, 0.8
    fd = (expm((A0 + d * A1) * t) - expm((A0 - d * A1) * t)) @ vec(pi0) / (2 * d)
    rho1 = first_order_state(L0, L1, pi0, t)
    assert np.allclose(rho1, unvec(fd), atol=1e-8)
    assert abs(np.trace(rho1)) < 1e-12
    assert np.allclose(first_order_state(L0, L1, pi0, 0.0), 0, atol=1e-12)


def test_stationary_state_and_limits():
    _, _, _, L0, L1, _ = model()
    pi0 = steady_state(L0)
    pi1 = stationary_first_order_state(L0, L1, pi0)
    assert np.allclose(L0.apply(pi1), -L1.apply(pi0), atol=1e-10)
    late = first_order_states(L0, L1, pi0, [200.0, np.inf])
    assert np.allclose(late[0], pi1, atol=1e-9)
    assert np.allclose(late[1], pi1)


def test_not_steady_reference(rng):
    _, _, _, L0, L1, _ = model()
    with pytest.raises(NotSteady):
        stationary_first_order_state(L0, L1, random_density(4, rng))


def test_regime_classification():
    m = build_qubit_scenario(QubitScenario())
    exp = first_order_corrections(eigendecompose_hermitian(m.H0), m.V)
    decs = [D.decomposition for D in m.L0.dissipators]
    # levels move by 2 delta Omega per channel, so nu1 = 4 delta Omega
    rep = classify_regime(exp, 1e-4, 1.0, decs)
    assert rep.nu1 == pytest.approx(4e-4 * 100)
    assert rep.regime == "local"
    assert classify_regime(exp, 0.5, 1.0, decs).regime == "global"
    assert classify_regime(exp, 5e-3, 1.0, decs).regime == "intermediate"


def test_local_builder_warns_outside_regime():
    m = build_qubit_scenario(QubitScenario())
    with pytest.warns(RegimeWarning):
        build_local_perturbed(m.H0, m.V, 0.5, m.baths)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        L = build_local_perturbed(m.H0, m.V, 1e-5, m.baths)
    assert isinstance(L, Liouvillian)
    assert np.allclose(L.hamiltonian, m.H0 + 1e-5 * m.V)
