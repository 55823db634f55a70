import numpy as np
import pytest

from lgks_response import (TruncationTooSmall, expectation, heat_current, steady_state)
from lgks_response.core import random_density
from lgks_response.models import (HEISENBERG_BASIS, OscillatorScenario, QubitScenario,
                                  explicit_oscillator_generator, explicit_qubit_generator,
                                  build_oscillator_scenario, build_perturbed_qubit_global,
                                  build_qubit_scenario, oscillator_heisenberg_coefficients,
                                  oscillator_reference, preset, qubit_global_current,
                                  qubit_reference)
from lgks_response.response import finite_difference_oracle


def low_occupation_state(m, rng, nmax_total=2):
    """Random state on Fock states with n+ + n- <= nmax_total, away from the truncation edge."""
    n = np.real(np.diag(m.ops["n_minus"]) + np.diag(m.ops["n_plus"]))
    P = np.diag((n <= nmax_total).astype(float))
    rho = P @ random_density(len(n), rng) @ P
    return rho / np.trace(rho)


def test_oscillator_dissipators_match_explicit_form(rng):
    p = preset("fig2-deskscale").with_(nmax=6)
    m = build_oscillator_scenario(p)
    A0, A1 = explicit_oscillator_generator(p, m.ops)
    rho = low_occupation_state(m, rng)
    for lab in ("a", "b"):
        for ours, ref in ((m.L0, A0), (m.L1, A1)):
            a, b = ours.dissipator(lab).apply(rho), ref.dissipator(lab).apply(rho)
            assert np.max(np.abs(a - b)) < 1e-12
    assert np.allclose(m.L1.hamiltonian, m.V)


def test_heisenberg_coefficients():
    p = preset("fig2-deskscale")
    tau = np.linspace(0, 3, 31)
    f = oscillator_heisenberg_coefficients(p, tau)
    assert f.shape == (len(HEISENBERG_BASIS), len(tau))
    assert np.allclose(f[1:5], oscillator_reference("f_coeffs", p, tau), atol=1e-12)
    assert np.allclose(oscillator_heisenberg_coefficients(p, 0.0)[[0, 3, 5]], [0.5, -0.5, 0.5])


def test_oscillator_occupation():
    p = preset("fig2-deskscale")
    m = build_oscillator_scenario(p, first_order=False)
    ada = expectation(steady_state(m.L0), m.ops["ada"]).real
    assert ada == pytest.approx(oscillator_reference("ada", p), rel=1e-4)


def test_oscillator_validation():
    with pytest.raises(TruncationTooSmall):
        build_oscillator_scenario(preset("fig2"))
    with pytest.raises(ValueError):
        OscillatorScenario(g=120.0)
    with pytest.raises(ValueError):
        build_oscillator_scenario(preset("fig2-deskscale").with_(nmax=3))
    with pytest.warns(UserWarning):
        build_oscillator_scenario(preset("fig2-deskscale").with_(nmax=4, delta=0.2), first_order=False)
    with pytest.raises(KeyError):
        preset("nope")


def test_qubit_generator_matches_explicit_form(rng):
    p = QubitScenario()
    L = build_qubit_scenario(p).L0
    ref = explicit_qubit_generator(p)
    rho = random_density(4, rng)
    assert np.allclose(L.apply(rho), ref.apply(rho), atol=1e-12)


def test_qubit_local_first_order_current():
    p = QubitScenario(Ta=500.0, Tb=400.0)
    m = build_qubit_scenario(p)

    def Ja(L, rho):
        return heat_current(L, "a", L.hamiltonian, rho, form="energy")
    est, err = finite_difference_oracle(m, Ja, [1e-3, 3e-4, 1e-4])
    assert est == pytest.approx(qubit_reference("J1", p), rel=1e-8)


def test_qubit_global_current():
    p = QubitScenario()
    L = build_perturbed_qubit_global(p)
    rho = steady_state(L)
    for lab in ("a", "b"):
        J = heat_current(L, lab, L.hamiltonian, rho)
        assert J == pytest.approx(qubit_global_current(p, rho, lab), rel=1e-10)
    # equal temperatures: no flow
    p = QubitScenario(Ta=50.0, Tb=50.0)
    L = build_perturbed_qubit_global(p)
    assert abs(heat_current(L, "a", L.hamiltonian, steady_state(L))) < 1e-10
