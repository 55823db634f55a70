import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgks_response import (DimensionMismatch, NonHermitianInput, NonlinearAction,
                           eigendecompose_hermitian, expectation, gibbs_state,
                           load_operator, save_operator, vectorize_superoperator)
from lgks_response.core import (commutator, gibbs_log, random_density, random_hermitian,
                                random_matrix, unvec, vec)
from lgks_response.models import SIGMA_Z, qubit_hamiltonian, QubitScenario


def test_identity_single_group():
    es = eigendecompose_hermitian(np.eye(3))
    assert np.allclose(es.values, 1)
    assert es.groups == ((0, 1, 2),)


def test_qubit_pair_spectrum():
    H, _ = qubit_hamiltonian(QubitScenario())
    es = eigendecompose_hermitian(H)
    assert np.allclose(es.values, [-1000, -200, 200, 1000], atol=1e-9)
    assert len(es.groups) == 4


def test_constructed_degeneracy():
    es = eigendecompose_hermitian(np.diag([0.0, 0.0, 5.0]), 1e-9)
    assert es.groups == ((0, 1), (2,))


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        eigendecompose_hermitian(np.array([[0, 1], [0, 0]]))


def test_expectation_values():
    assert expectation(np.eye(3) / 3, np.eye(3)) == pytest.approx(1)
    assert expectation(np.diag([1.0, 0]), np.diag([3.0, 7.0])) == pytest.approx(3)
    # thermal qubit at omega/T = 1; index 0 is the lower level
    rho = gibbs_state(0.5 * SIGMA_Z, 1.0)
    assert expectation(rho, -SIGMA_Z).real == pytest.approx(np.tanh(0.5), abs=1e-12)
    with pytest.raises(DimensionMismatch):
        expectation(np.eye(2), np.eye(3))


def test_vectorize_identity_and_commutator():
    M = vectorize_superoperator(lambda X: X, 2)
    assert np.allclose(M, np.eye(4))
    H = np.diag([0.0, 2.5])
    M = vectorize_superoperator(lambda X: commutator(H, X), 2)
    ev = np.sort_complex(np.linalg.eigvals(M))
    assert np.allclose(sorted(ev.real), [-2.5, 0, 0, 2.5])


def test_nonlinear_action_detected():
    with pytest.raises(NonlinearAction):
        vectorize_superoperator(lambda X: X @ X, 2)


def test_vec_identity(rng):
    # vec(A X B) = (B^T kron A) vec(X) for column stacking
    A, X, B = (random_matrix(3, rng) for _ in range(3))
    assert np.allclose(vec(A @ X @ B), np.kron(B.T, A) @ vec(X))
    assert np.allclose(unvec(vec(X)), X)


def test_gibbs_zero_temperature_and_log():
    H = np.diag([1.0, 0.0, 0.0])
    rho = gibbs_state(H, 0.0)
    assert np.allclose(rho, np.diag([0, 0.5, 0.5]))
    H = np.diag([0.0, 800.0])
    lp = gibbs_log(H, 1.0)
    assert np.isfinite(lp).all()
    assert lp[1, 1] == pytest.approx(-800.0)


def test_save_load_roundtrip(tmp_path, rng):
    A = random_matrix(4, rng)
    p = tmp_path / "op.txt"
    save_operator(p, A)
    assert np.array_equal(load_operator(p), A)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_gibbs_is_a_state(d, seed):
    rng = np.random.default_rng(seed)
    H = random_hermitian(d, rng)
    rho = gibbs_state(H, 0.7)
    assert np.trace(rho).real == pytest.approx(1)
    assert np.linalg.eigvalsh(rho).min() > -1e-12
    assert np.allclose(commutator(rho, H), 0, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_random_density_valid(d, seed):
    rho = random_density(d, np.random.default_rng(seed))
    assert np.allclose(rho, rho.conj().T)
    assert np.trace(rho).real == pytest.approx(1)
    assert np.linalg.eigvalsh(rho).min() > -1e-12
