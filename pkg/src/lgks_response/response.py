"""Linear response of steady-state observables to a static perturbation delta V.

phi(tau) = <L1^dag A(tau)>_pi0 with A(tau) = exp(L0^dag tau) A, split into the
commutator part <i[V, A(tau)]> and the bath-induced part <D1^dag A(tau)>.
Responses are per unit delta; the observable shift is delta * Phi.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, simpson, trapezoid

from .core import as_operator, commutator, expectation
from .errors import GridTooCoarse, NonDecayingResponse
from .lgks import _exact_samples, propagate_samples, steady_state
from .perturb import build_global_perturbed, build_local_perturbed, check_steady

IMAG_TOL = 1e-9
GRID_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class ResponseTrace:
    tau_grid: np.ndarray
    phi11: np.ndarray
    phi12: np.ndarray
    phi_total: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.tau_grid)


def slowest_rate(L0):
    """Smallest channel decay rate Gamma(w) - Gamma(-w) over all baths."""
    rates = [gp - gm for D in L0.dissipators for (_, gp, gm, _) in D.channels if gp - gm > 0]
    return min(rates) if rates else 1.0


def default_tau_grid(L0, n=2000, span=12.0):
    """n points over [0, span / gamma_slowest]."""
    return np.linspace(0.0, span / slowest_rate(L0), n)


def resolved_tau_grid(L0, tmax, omega=None, per_radian=30.0, n_min=2000):
    """Uniform grid on [0, tmax] with h * omega = 1 / per_radian.

    omega defaults to the fastest Bohr frequency the baths see. The
    Simpson/trapezoid agreement demanded by integrated_response needs
    h * omega well below 0.1.
    """
    if omega is None:
        omega = max([abs(om) for D in L0.dissipators for (om, _, _, _) in D.channels] or [1.0])
    n = max(n_min, int(np.ceil(tmax * omega * per_radian)) + 1)
    return np.linspace(0.0, tmax, n)


def response_function(A, L0, L1, pi0, tau_grid=None, dt=None, metadata=None, method="auto"):
    """phi11, phi12 and their sum on tau_grid by Heisenberg propagation of A under L0.

    method "auto" uses exact sector exponentials for secular L0 and RK4 otherwise.
    """
    A = as_operator(A, name="A")
    check_steady(L0, pi0)
    tau = default_tau_grid(L0) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    V = L1.hamiltonian
    if method == "auto":
        method = "exact" if L0.is_secular else "rk4"
    # Tr(pi0 L1^dag A) = Tr((L1 pi0) A): the two weights are fixed, A(tau) moves
    W11 = 1j * commutator(pi0, V)
    W12 = L1.apply_dissipative(pi0) if L1.dissipators else np.zeros_like(W11)
    if method == "exact":
        fr = L0.frame
        W = np.stack([fr.to_eb(W11).T.reshape(-1), fr.to_eb(W12).T.reshape(-1)])
        vals = _exact_samples(L0, A, tau, "heisenberg", lambda Y: W @ Y.reshape(-1), eigenbasis=True)
    else:
        W = np.stack([W11.T.reshape(-1), W12.T.reshape(-1)])
        vals = propagate_samples(L0, A, tau, dt, "heisenberg", observe=lambda At: W @ At.reshape(-1),
                                 method=method)
    vals = np.array(vals)
    if vals.size == 0:
        vals = np.zeros((0, 2), dtype=complex)
    scale = max(1.0, float(np.max(np.abs(vals.real)))) if vals.size else 1.0
    hermitian = np.allclose(A, A.conj().T, atol=1e-12 * max(1.0, np.max(np.abs(A))))
    if hermitian and vals.size and np.max(np.abs(vals.imag)) > IMAG_TOL * scale:
        raise ValueError(f"response has imaginary part {np.max(np.abs(vals.imag)):.3g}")
    phi11, phi12 = vals[:, 0].real.copy(), vals[:, 1].real.copy()
    meta = {} if metadata is None else dict(metadata)
    return ResponseTrace(tau, phi11, phi12, phi11 + phi12, meta)


def _integrate(tau, y, t):
    if t < tau[0] or t > tau[-1] * (1 + 1e-12):
        raise ValueError(f"t={t} outside the stored grid [{tau[0]}, {tau[-1]}]")
    k = int(np.searchsorted(tau, t, side="right"))
    x, f = tau[:k], y[:k]
    if len(x) < 3:
        s = tr = trapezoid(f, x) if len(x) > 1 else 0.0
    else:
        s, tr = simpson(f, x=x), trapezoid(f, x)
    # partial last interval
    if t > x[-1] and k < len(tau):
        ft = np.interp(t, tau, y)
        piece = 0.5 * (t - x[-1]) * (f[-1] + ft)
        s, tr = s + piece, tr + piece
    return float(s), float(tr)


def _grid_check(s, tr, scale, what):
    if abs(s - tr) > GRID_TOL * max(abs(s), scale):
        raise GridTooCoarse(f"{what}: Simpson {s:.10g} vs trapezoid {tr:.10g}; refine the tau grid")


def integrated_response(trace, t):
    """(Phi11(t), Phi12(t)) by composite Simpson on the stored grid."""
    tau = np.asarray(trace.tau_grid)
    if t == 0:
        return 0.0, 0.0
    scale = 1e-12 * max(np.max(np.abs(trace.phi11)), np.max(np.abs(trace.phi12)), 1e-300) * t
    out = []
    for name, y in (("phi11", trace.phi11), ("phi12", trace.phi12)):
        s, tr = _integrate(tau, np.asarray(y), t)
        _grid_check(s, tr, scale, name)
        out.append(s)
    return tuple(out)


def cumulative_response(trace):
    """Phi11 and Phi12 at every grid point."""
    tau = np.asarray(trace.tau_grid)
    if len(tau) < 3:
        raise GridTooCoarse("need at least three grid points")
    return (cumulative_simpson(trace.phi11, x=tau, initial=0.0),
            cumulative_simpson(trace.phi12, x=tau, initial=0.0))


def _tail(tau, y):
    """Integral beyond tau[-1] assuming the envelope keeps its fitted exponential decay."""
    lo = tau[-1] - 0.1 * (tau[-1] - tau[0])
    m = tau >= lo
    t, a = tau[m], np.abs(y[m])
    if len(t) < 4 or not np.all(a > 0):
        return 0.0
    # envelope: running maximum from the right, which flattens oscillation nodes
    env = np.maximum.accumulate(a[::-1])[::-1]
    slope = np.polyfit(t, np.log(env), 1)[0]
    if slope >= 0:
        return 0.0
    return float(y[-1] / -slope)


def steady_state_response(trace, decay_tol=1e-6):
    """Phi(infinity) for each part and their sum: Simpson to tau_max plus an exponential tail.

    Returns (Phi11_inf, Phi12_inf).
    """
    tau = np.asarray(trace.tau_grid)
    peak = max(np.max(np.abs(trace.phi11)), np.max(np.abs(trace.phi12)))
    for name, y in (("phi11", trace.phi11), ("phi12", trace.phi12)):
        if abs(y[-1]) > decay_tol * max(peak, 1e-300) and peak > 0:
            raise NonDecayingResponse(
                f"{name}(tau_max) = {y[-1]:.3g} is not below {decay_tol:g} of max |phi|; extend the grid")
    P11, P12 = integrated_response(trace, tau[-1])
    return P11 + _tail(tau, trace.phi11), P12 + _tail(tau, trace.phi12)


def _as_functional(A):
    if callable(A):
        return A
    A = as_operator(A, name="A")
    return lambda L, rho: expectation(rho, A).real


def finite_difference_oracle(scenario, A, delta_list, mode="local", **build_kw):
    """Richardson-extrapolated d<A>/d delta at delta = 0 from perturbed steady states.

    scenario needs attributes H0, V, baths. A is an operator or a callable
    (L, rho) -> real, e.g. a heat-current functional. Central differences
    D(delta) = (A(delta) - A(-delta)) / (2 delta) are fitted to
    a + b delta^2 (+ c delta^4 with three or more points); a is returned
    with the change against the fit without the largest delta as an error
    estimate.
    """
    deltas = np.sort(np.abs(np.asarray(delta_list, dtype=float)))
    if len(deltas) < 3 or deltas[0] <= 0 or deltas[-1] / deltas[0] < 10 * (1 - 1e-12):
        raise ValueError("need at least three positive deltas spanning a decade")
    f = _as_functional(A)
    H0, V, baths = scenario.H0, scenario.V, scenario.baths
    if mode == "local":
        def build(d):
            return build_local_perturbed(H0, V, d, baths, check_regime=False, **build_kw)
    elif mode == "global":
        def build(d):
            return build_global_perturbed(H0, V, d, baths, **build_kw)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    def value(d):
        L = build(d)
        return f(L, steady_state(L))

    D = np.array([(value(d) - value(-d)) / (2 * d) for d in deltas])

    def fit(dl, Dl):
        order = min(len(dl) - 1, 2)
        X = np.vander(dl ** 2, order + 1, increasing=True)
        return np.linalg.lstsq(X, Dl, rcond=None)[0][0]

    est = fit(deltas, D)
    err = abs(est - fit(deltas[:-1], D[:-1]))
    return float(est), float(err)
