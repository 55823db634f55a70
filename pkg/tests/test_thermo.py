import numpy as np
import pytest

from lgks_response import (EigenvalueShiftPresent, NotStationaryReference,
                           RankDeficientState, SingularReference, ZeroTemperatureBath,
                           entropy_first_order, entropy_production,
                           entropy_production_first_order, first_order_problem, heat_current,
                           heat_current_first_order, spohn_functional, steady_state,
                           von_neumann_entropy)
from lgks_response.core import gibbs_state, random_density
from lgks_response.models import SIGMA_X, QubitScenario, build_qubit_scenario, qubit_reference
from lgks_response.response import finite_difference_oracle
from lgks_response.verification import random_eigenvector_model


def energy_current(label):
    def J(L, rho):
        return heat_current(L, label, L.hamiltonian, rho, form="energy")
    return J


def test_qubit_pair_currents():
    p = QubitScenario()
    m = build_qubit_scenario(p)
    pi = steady_state(m.L0)
    Ja = heat_current(m.L0, "a", m.H0, pi)
    Jb = heat_current(m.L0, "b", m.H0, pi)
    assert Ja == pytest.approx(qubit_reference("J0", p), rel=1e-8)
    assert Ja + Jb == pytest.approx(0, abs=1e-12 * abs(Ja))
    assert Ja > 0
    snap = entropy_production(m.L0, pi, m.H0)
    assert abs(snap.entropy_rate) < 1e-10
    assert snap.entropy_production == pytest.approx(-Ja / p.Ta - Jb / p.Tb, rel=1e-10)
    assert snap.entropy_production > 0


def test_heat_current_forms(decay, rng):
    H, L = decay(omega=1.0, T=0.8)
    rho = random_density(2, rng)
    e = heat_current(L, "a", H, rho, form="energy")
    s = heat_current(L, "a", H, rho, form="entropy")
    assert e == pytest.approx(s, rel=1e-10)
    # ln pi is affine in H and Tr(D rho) = 0, so the forms agree for any H
    assert heat_current(L, "a", H + 0.3 * SIGMA_X, rho) == pytest.approx(
        heat_current(L, "a", H + 0.3 * SIGMA_X, rho, form="entropy"), rel=1e-10)
    with pytest.raises(ValueError):
        heat_current(L, "a", H, rho, form="other")
    H, L = decay(omega=1.0, T=0.0)
    assert heat_current(L, "a", H, rho) == heat_current(L, "a", H, rho, form="energy")
    with pytest.raises(SingularReference):
        heat_current(L, "a", H, rho, form="entropy")
    with pytest.raises(ZeroTemperatureBath):
        entropy_production(L, rho, H)


def test_entropy_production_nonnegative(decay, rng):
    H, L = decay(omega=1.3, T=0.6)
    for _ in range(10):
        rho = random_density(2, rng)
        assert entropy_production(L, rho, H).entropy_production >= -1e-12
        assert spohn_functional(L, rho, gibbs_state(H, 0.6)) >= -1e-12


def test_spohn_errors(decay, rng):
    H, L = decay(omega=1.0, T=0.8)
    with pytest.raises(NotStationaryReference):
        spohn_functional(L, random_density(2, rng), random_density(2, rng))
    H, L = decay(omega=1.0, T=0.0)
    with pytest.raises(RankDeficientState):
        spohn_functional(L, random_density(2, rng), steady_state(L))


def test_von_neumann():
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(np.log(4))
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0


def eigenvector_problem():
    H0, V, baths = random_eigenvector_model()
    return (H0, V, baths), first_order_problem(H0, V, baths, zero_frequency="drop")


def test_first_order_current_forms_and_oracle():
    (H0, V, baths), prob = eigenvector_problem()
    t = np.array([0.0, 0.5, 2.0, np.inf])
    for lab in ("a", "b"):
        e = heat_current_first_order(prob, lab, t, form="energy")
        s = heat_current_first_order(prob, lab, t, form="entropy")
        assert np.allclose(e, s, rtol=1e-7, atol=1e-12)
        heat_current_first_order(prob, lab, 1.0, form="both")

    class Scen:
        pass
    sc = Scen()
    sc.H0, sc.V, sc.baths = H0, V, baths
    est, _ = finite_difference_oracle(sc, energy_current("a"), [1e-2, 3e-3, 1e-3], mode="global",
                                      zero_frequency="drop")
    assert heat_current_first_order(prob, "a", np.inf) == pytest.approx(est, abs=1e-7)


def test_first_order_entropy():
    _, prob = eigenvector_problem()
    pi0 = steady_state(prob.L0)
    t = np.linspace(0, 2, 2001)
    S1, dS1 = entropy_first_order(prob, t, pi0)
    assert S1[0] == pytest.approx(0, abs=1e-14)
    assert np.allclose(np.gradient(S1, t)[5:-5], dS1[5:-5], atol=1e-6)
    sig = entropy_production_first_order(prob, np.inf, pi0)
    Ja = heat_current_first_order(prob, "a", np.inf, pi0=pi0)
    Jb = heat_current_first_order(prob, "b", np.inf, pi0=pi0)
    assert sig == pytest.approx(-Ja / 1.5 - Jb / 0.7, abs=1e-10)


def test_level_shifts_rejected():
    m = build_qubit_scenario(QubitScenario())
    with pytest.raises(EigenvalueShiftPresent):
        heat_current_first_order(m, "a", 1.0)
