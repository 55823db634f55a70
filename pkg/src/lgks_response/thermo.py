"""Heat currents, entropy and entropy production, with their first-order corrections.

Units k_B = hbar = 1. The heat current J^alpha is the energy flow from bath
alpha into the system, J^alpha = Tr(rho D_alpha^dag H).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import as_operator, dag, expectation, gibbs_log, gibbs_state
from .errors import (NotStationaryReference, RankDeficientState,
                     SingularReference, ZeroTemperatureBath)
from .lgks import steady_state
from .perturb import (FirstOrderProblem, _check_no_shift, first_order_corrections,
                      first_order_states)

CLAMP = 1e-14
CROSS_CHECK_TOL = 1e-8


def _log_clamped(rho, clamp=CLAMP):
    """ln rho with eigenvalues clamped from below; also returns how many were clamped."""
    p, U = np.linalg.eigh(0.5 * (rho + dag(rho)))
    n = int(np.sum(p < clamp))
    return (U * np.log(np.maximum(p, clamp))) @ dag(U), n


def von_neumann_entropy(rho):
    p = np.linalg.eigvalsh(0.5 * (rho + dag(rho)))
    p = p[p > CLAMP]
    return float(-np.sum(p * np.log(p)))


def _temperature(D):
    if D.temperature is None:
        raise ValueError(f"bath {D.label} has no temperature")
    return D.temperature


def heat_current(L, bath_label, H, rho, form="both", tol=CROSS_CHECK_TOL):
    """J = Tr(rho D^dag H) for one bath.

    form "both" also evaluates -T Tr((D rho) ln pi) with pi the Gibbs state
    of H at the bath temperature and raises if the two disagree beyond tol
    (relative to the size of the terms); at T = 0 it falls back to the
    energy form. form "entropy" raises SingularReference at T = 0.
    """
    D = L.dissipator(bath_label)
    H = as_operator(H, hermitian=True, name="H")
    G = D.apply_adjoint(H)
    J = expectation(rho, G).real
    if form == "energy":
        return J
    if form not in ("both", "entropy"):
        raise ValueError(f"unknown form {form!r}")
    T = _temperature(D)
    if T == 0:
        if form == "entropy":
            raise SingularReference(f"bath {bath_label}: Gibbs reference at T = 0 is singular")
        return J
    Drho = D.apply(rho)
    Js = -T * expectation(Drho, gibbs_log(H, T)).real
    if form == "entropy":
        return Js
    scale = max(abs(J), np.linalg.norm(G) * np.linalg.norm(rho), 1e-300)
    if abs(J - Js) > tol * scale:
        raise ValueError(f"bath {bath_label}: energy form {J:.12g} and entropy form {Js:.12g} disagree")
    return J


@dataclass(frozen=True)
class ThermoSnapshot:
    t: float
    heat_currents: dict
    entropy: float
    entropy_rate: float
    entropy_production: float
    clamped: int = 0
    extra: dict = field(default_factory=dict)


def entropy_production(L, rho, H, t=0.0, regularize=True):
    """sigma = dS/dt - sum_alpha J^alpha / T_alpha, dS/dt = -Tr((L rho) ln rho)."""
    temps = {}
    for D in L.dissipators:
        T = _temperature(D)
        if T == 0:
            raise ZeroTemperatureBath(f"bath {D.label} has T = 0")
        temps[D.label] = T
    logr, n = _log_clamped(rho)
    if n and not regularize:
        raise RankDeficientState(f"{n} eigenvalues of rho below {CLAMP:g}")
    dS = -expectation(L.apply(rho), logr).real
    J = {lab: heat_current(L, lab, H, rho, form="energy") for lab in temps}
    sigma = dS - sum(J[lab] / temps[lab] for lab in temps)
    return ThermoSnapshot(float(t), J, von_neumann_entropy(rho), float(dS), float(sigma), n)


def spohn_functional(L, rho, pi, log_pi=None, tol=1e-8):
    """-Tr((L rho)(ln rho - ln pi)); non-negative for a generator with stationary pi.

    log_pi may be given when pi has eigenvalues too small to take logs of.
    """
    res = np.linalg.norm(L.apply(pi))
    if res > tol * max(1.0, L.norm_estimate()):
        raise NotStationaryReference(f"reference residual {res:.3g}")
    logr, _ = _log_clamped(rho)
    if log_pi is None:
        log_pi, n = _log_clamped(pi)
        if n:
            raise RankDeficientState("reference state is rank deficient; pass log_pi")
    return float(-expectation(L.apply(rho), logr - log_pi).real)


# ---------------------------------------------------------------- first order

def _problem(scenario):
    """FirstOrderProblem view of a scenario; raises if levels shift at first order."""
    if isinstance(scenario, FirstOrderProblem):
        return scenario
    L1 = getattr(scenario, "L1", None)
    if L1 is None:
        L0 = scenario.L0
        eig = L0.dissipators[0].decomposition.eig
        _check_no_shift(first_order_corrections(eig, scenario.V), 1e-9)
        raise ValueError("scenario carries no first-order generator")
    return FirstOrderProblem(scenario.H0, scenario.V, scenario.L0, L1)


def _rho1(prob, pi0, times):
    return first_order_states(prob.L0, prob.L1, pi0, times)


def heat_current_first_order(scenario, bath_label, t, form="energy", pi0=None):
    """J1 of one bath at time(s) t after switching on delta V at t = 0.

    Energy form: Tr(rho1(t) D0^dag H0) + <D1^dag H0> + <D0^dag V>. The
    entropy form differentiates -T Tr((D rho) ln pi) in delta, with the
    first-order change of ln pi taken by central differences of the Gibbs
    log of H0 + h V. form "both" returns the energy form after checking
    agreement within 1e-7 relative.
    """
    p = _problem(scenario)
    pi0 = steady_state(p.L0) if pi0 is None else pi0
    D0, D1 = p.L0.dissipator(bath_label), p.L1.dissipator(bath_label)
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    rho1 = _rho1(p, pi0, times)
    const = (expectation(pi0, D1.apply_adjoint(p.H0)) + expectation(pi0, D0.apply_adjoint(p.V))).real
    G = D0.apply_adjoint(p.H0)
    energy = np.array([expectation(r, G).real for r in rho1]) + const
    out = energy
    if form in ("entropy", "both"):
        T = _temperature(D0)
        if T == 0:
            raise SingularReference(f"bath {bath_label}: Gibbs reference at T = 0 is singular")
        lp = gibbs_log(p.H0, T)
        span = np.ptp(np.linalg.eigvalsh(p.H0))
        h = 1e-3 * max(span, 1.0) / max(np.linalg.norm(p.V, 2), 1e-300)
        dlp = (gibbs_log(p.H0 + h * p.V, T) - gibbs_log(p.H0 - h * p.V, T)) / (2 * h)
        c = expectation(D1.apply(pi0), lp) + expectation(D0.apply(pi0), dlp)
        entropy = np.array([-T * (expectation(D0.apply(r), lp) + c).real for r in rho1])
        if form == "both":
            scale = max(np.max(np.abs(energy)),
                        np.linalg.norm(G) * max(np.linalg.norm(r) for r in rho1) + abs(const), 1e-300)
            if np.max(np.abs(energy - entropy)) > 1e-7 * scale:
                raise ValueError(f"bath {bath_label}: first-order energy and entropy forms disagree "
                                 f"by {np.max(np.abs(energy - entropy)):.3g}")
        else:
            out = entropy
    elif form != "energy":
        raise ValueError(f"unknown form {form!r}")
    return float(out[0]) if scalar else out


def _log_pi0(p, pi0, log_pi0):
    if log_pi0 is not None:
        return log_pi0
    if len(p.L0.dissipators) == 1 and p.L0.dissipators[0].temperature:
        T = p.L0.dissipators[0].temperature
        if np.linalg.norm(pi0 - gibbs_state(p.H0, T)) < 1e-8:
            return gibbs_log(p.H0, T)
    lp, n = _log_clamped(pi0)
    if n:
        raise RankDeficientState(f"pi0 has {n} eigenvalues below {CLAMP:g}; pass log_pi0")
    return lp


def entropy_first_order(scenario, t, pi0=None, log_pi0=None):
    """(S1(t), dS1/dt(t)) with S1 = -Tr(rho1 ln pi0) and dS1/dt = -Tr(rho1'(t) ln pi0).

    rho1'(t) = exp(L0 t) L1 pi0 = L0 rho1(t) + L1 pi0.
    """
    p = _problem(scenario)
    pi0 = steady_state(p.L0) if pi0 is None else pi0
    lp = _log_pi0(p, pi0, log_pi0)
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    src = p.L1.apply(pi0)
    S1, dS1 = [], []
    for r in _rho1(p, pi0, times):
        S1.append(-expectation(r, lp).real)
        dS1.append(-expectation(p.L0.apply(r) + src, lp).real)
    S1, dS1 = np.array(S1), np.array(dS1)
    return (float(S1[0]), float(dS1[0])) if scalar else (S1, dS1)


def entropy_production_first_order(scenario, t, pi0=None, log_pi0=None):
    """sigma1(t) = dS1/dt - sum_alpha J1^alpha(t) / T_alpha."""
    p = _problem(scenario)
    pi0 = steady_state(p.L0) if pi0 is None else pi0
    _, dS1 = entropy_first_order(p, t, pi0, log_pi0)
    total = dS1
    for D in p.L0.dissipators:
        T = _temperature(D)
        if T == 0:
            raise ZeroTemperatureBath(f"bath {D.label} has T = 0")
        total = total - heat_current_first_order(p, D.label, t, pi0=pi0) / T
    return total
