"""The two worked scenarios: coupled oscillators in a linear field and a coupled qubit pair.

Oscillators
-----------
Normal modes d+ = (a + b)/sqrt2, d- = (b - a)/sqrt2 with frequencies
w+- = omega +- g. The + mode is represented in a displaced Fock basis,
d+ = c - eps/w+, so that H0 = w+ d+^dag d+ + w- d-^dag d- + eps (d+ + d+^dag)
is diagonal and truncation acts on excitations above the displaced vacuum.
The generic secular builder with couplings a + a^dag and b + b^dag and
gamma(w+-) = gamma_+- then gives exactly the gamma/2 dissipators and the
linear-field term of the explicit generator. The perturbation is
V = w- (d-^dag + d-)^3.

Qubits
------
Basis |0> = ground, sigma_z = diag(-1, 1), two-qubit ordering A (x) B.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .core import dag
from .errors import TruncationTooSmall
from .lgks import (BathSpec, Dissipator, Liouvillian, Term, bose_occupation,
                   build_liouvillian, nearest_rate)
from .perturb import (build_first_order_dissipator, build_first_order_generator,
                      expand_coupling_operators, first_order_corrections)

SQ2 = np.sqrt(2.0)


def destroy(n):
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


# ---------------------------------------------------------------- oscillators

@dataclass(frozen=True)
class OscillatorScenario:
    omega: float = 100.0
    g: float = 90.0
    epsilon: float = 5.0
    gamma_plus: float = 1.0
    gamma_minus: float = 1.0
    Ta: float = 5.0
    Tb: float = 6.0
    nmax: int = 8
    delta: float = 0.02

    def __post_init__(self):
        if not self.g < self.omega:
            raise ValueError("need g < omega so that both normal-mode frequencies are positive")
        if self.Ta < 0 or self.Tb < 0:
            raise ValueError("temperatures must be non-negative")

    @property
    def omega_plus(self):
        return self.omega + self.g

    @property
    def omega_minus(self):
        return self.omega - self.g

    @property
    def kappa(self):
        return self.epsilon / self.omega_plus

    @property
    def Tbar(self):
        return 0.5 * (self.Ta + self.Tb)

    def occupations(self):
        """n_l^alpha keyed by (mode, bath)."""
        return {(l, b): bose_occupation(w, T)
                for l, w in (("+", self.omega_plus), ("-", self.omega_minus))
                for b, T in (("a", self.Ta), ("b", self.Tb))}

    @property
    def nbar_minus(self):
        n = self.occupations()
        return 0.5 * (n["-", "a"] + n["-", "b"])

    def with_(self, **kw):
        return replace(self, **kw)


def oscillator_operators(p):
    """Truncated two-mode operators (+ mode first) in the displaced basis."""
    N = p.nmax
    c = destroy(N)
    I = np.eye(N)
    alpha = -p.kappa
    ops = {}
    ops["c"] = np.kron(c, I)
    ops["d_plus"] = ops["c"] + alpha * np.eye(N * N)
    ops["d_minus"] = np.kron(I, c)
    dp, dm = ops["d_plus"], ops["d_minus"]
    ops["a"] = (dp - dm) / SQ2
    ops["b"] = (dp + dm) / SQ2
    ops["x_minus"] = dm + dag(dm)
    ops["y_minus"] = 1j * (dm - dag(dm))
    ops["x_plus"] = dp + dag(dp)
    ops["y_plus"] = 1j * (dp - dag(dp))
    ops["n_minus"] = dag(dm) @ dm
    ops["n_plus"] = dag(dp) @ dp
    ops["u"] = dag(dp) @ dm + dp @ dag(dm)
    ops["v"] = 1j * (dag(dp) @ dm - dp @ dag(dm))
    ops["ada"] = dag(ops["a"]) @ ops["a"]
    ops["J_minus"] = (dag(dm) @ dag(dm) - 3 * dm @ dm + 6 * dag(dm) @ dm + 3 * np.eye(N * N))
    return ops


@dataclass(frozen=True, eq=False)
class OscillatorModel:
    params: OscillatorScenario
    H0: np.ndarray
    V: np.ndarray
    baths: tuple
    L0: Liouvillian
    L1: object
    expansion: object
    ops: dict

    def __iter__(self):
        return iter((self.H0, self.V, self.baths, self.L0, self.L1))


def oscillator_rate_profile(p):
    return nearest_rate([(p.omega_minus, p.gamma_minus), (p.omega_plus, p.gamma_plus)])


def oscillator_hamiltonian(p, ops=None):
    ops = oscillator_operators(p) if ops is None else ops
    dp, dm = ops["d_plus"], ops["d_minus"]
    H0 = (p.omega_plus * dag(dp) @ dp + p.omega_minus * dag(dm) @ dm
          + p.epsilon * (dp + dag(dp)))
    V = p.omega_minus * np.linalg.matrix_power(ops["x_minus"], 3)
    return 0.5 * (H0 + dag(H0)), V


def oscillator_baths(p, ops=None):
    ops = oscillator_operators(p) if ops is None else ops
    prof = oscillator_rate_profile(p)
    a, b = ops["a"], ops["b"]
    return (BathSpec("a", a + dag(a), p.Ta, prof), BathSpec("b", b + dag(b), p.Tb, prof))


def check_truncation(p):
    n = bose_occupation(p.omega_minus, p.Tbar) if p.Tbar > 0 else 0.0
    if n > p.nmax / 4:
        raise TruncationTooSmall(
            f"thermal occupation {n:.3g} of the slow mode exceeds nmax/4 = {p.nmax / 4:g}")
    if p.delta > 0.3 / np.sqrt(p.nmax):
        warnings.warn(f"delta={p.delta} exceeds the validity bound 0.3/sqrt(nmax)", stacklevel=3)


def build_oscillator_scenario(p, first_order=True):
    """H0, V, baths, unperturbed generator and first-order generator on a truncated Fock space."""
    if p.nmax < 4:
        raise ValueError("nmax must be at least 4")
    check_truncation(p)
    ops = oscillator_operators(p)
    H0, V = oscillator_hamiltonian(p, ops)
    baths = oscillator_baths(p, ops)
    L0 = build_liouvillian(H0, baths)
    L1 = exp = None
    if first_order:
        exp = first_order_corrections(L0.dissipators[0].decomposition.eig, V)
        D1 = [build_first_order_dissipator(bath, expand_coupling_operators(exp, D.decomposition))
              for bath, D in zip(baths, L0.dissipators)]
        L1 = build_first_order_generator(V, D1)
    return OscillatorModel(p, H0, V, baths, L0, L1, exp, ops)


def oscillator_global_generator(p, delta=None, freq_cluster_tol=1.0):
    """Generator rebuilt in the eigenbasis of H0 + delta V.

    The truncated cubic shifts the levels at second order, so channels that
    belong together are merged with an explicit cluster tolerance; the small
    omega = 0 parts the perturbation induces are dropped.
    """
    delta = p.delta if delta is None else delta
    ops = oscillator_operators(p)
    H0, V = oscillator_hamiltonian(p, ops)
    return build_liouvillian(H0 + delta * V, oscillator_baths(p, ops),
                             freq_cluster_tol=freq_cluster_tol, zero_frequency="drop")


def explicit_oscillator_generator(p, ops=None):
    """The unperturbed and first-order oscillator generators written out term by term."""
    ops = oscillator_operators(p) if ops is None else ops
    n = p.occupations()
    dp, dm, J = ops["d_plus"], ops["d_minus"], ops["J_minus"]
    I = np.eye(dp.shape[0])
    k = p.kappa
    H0, V = oscillator_hamiltonian(p, ops)
    D0, D1 = [], []
    for bath in ("a", "b"):
        terms = []
        for l, d, gam in (("+", dp, p.gamma_plus), ("-", dm, p.gamma_minus)):
            up, dn = gam * n[l, bath] / 2, gam * (n[l, bath] + 1) / 2
            terms += [Term(dn, d, d), Term(up, dag(d), dag(d))]
        # linear-field term: the kappa-linear part of the displaced jump c = d+ + kappa
        up, dn = p.gamma_plus * n["+", bath] / 2, p.gamma_plus * (n["+", bath] + 1) / 2
        terms += [Term(dn * k, dp, I), Term(dn * k, I, dp),
                  Term(up * k, dag(dp), I), Term(up * k, I, dag(dp))]
        D0.append(Dissipator(bath, tuple(terms)))
        up, dn = p.gamma_minus * n["-", bath] / 2, p.gamma_minus * (n["-", bath] + 1) / 2
        D1.append(Dissipator(bath, (Term(dn, dm, J), Term(dn, J, dm),
                                    Term(up, dag(dm), dag(J)), Term(up, dag(J), dag(dm)))))
    return Liouvillian(H0, tuple(D0)), build_first_order_generator(V, D1)


def oscillator_heisenberg_matrix(p):
    """M[i, j] = coefficient of b_i in L0^dag(b_j), basis (N-, x-, y-, u, v, N+, x+, y+, 1)."""
    gm, gp = p.gamma_minus, p.gamma_plus
    wm, wp, eps, k = p.omega_minus, p.omega_plus, p.epsilon, p.kappa
    n = p.occupations()
    nbm = 0.5 * (n["-", "a"] + n["-", "b"])
    nbp = 0.5 * (n["+", "a"] + n["+", "b"])
    G = 0.5 * (gp + gm)
    D = wp - wm
    M = np.zeros((9, 9))
    M[0, 0] = -gm
    M[8, 0] = gm * nbm
    M[1, 1] = -gm / 2
    M[2, 1] = -wm
    M[1, 2] = wm
    M[2, 2] = -gm / 2
    M[4, 3] = D
    M[2, 3] = eps
    M[3, 3] = -G
    M[1, 3] = -k * gp / 2
    M[3, 4] = -D
    M[1, 4] = -eps
    M[4, 4] = -G
    M[2, 4] = -k * gp / 2
    M[7, 5] = eps
    M[5, 5] = -gp
    M[8, 5] = gp * nbp
    M[6, 5] = -k * gp / 2
    M[7, 6] = -wp
    M[6, 6] = -gp / 2
    M[8, 6] = -k * gp
    M[6, 7] = wp
    M[8, 7] = 2 * eps
    M[7, 7] = -gp / 2
    return M


HEISENBERG_BASIS = ("n_minus", "x_minus", "y_minus", "u", "v", "n_plus", "x_plus", "y_plus", "1")


def oscillator_heisenberg_coefficients(p, t):
    """f_t^1..f_t^9 with a^dag a(t) = sum_i f_t^i b_i in HEISENBERG_BASIS.

    At t = 0, a^dag a = (N+ + N- - u)/2, so f^1 = f^6 = 1/2 and f^4 = -1/2.
    """
    M = oscillator_heisenberg_matrix(p)
    f0 = np.zeros(9)
    f0[0] = f0[5] = 0.5
    f0[3] = -0.5
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([expm(M * s) @ f0 for s in ts]).T
    return out[:, 0] if np.ndim(t) == 0 else out


def oscillator_reference(quantity, p, tau=None):
    """Closed-form oscillator references.

    ada, phi11, phi12, Phi11_inf, Phi12_inf, f_coeffs (rows f^2..f^5) are
    the quoted closed forms; phi12 carries a factor (nbar - 1).
    phi12_closure and Phi12_inf_closure follow from closing the explicit
    generator exactly (thermal moments in the Heisenberg expansion) and
    carry -1 instead. total_inf = Phi11_inf + Phi12_inf.
    """
    n = p.occupations()
    k, wm, gm, gp = p.kappa, p.omega_minus, p.gamma_minus, p.gamma_plus
    nb = p.nbar_minus
    tau = None if tau is None else np.asarray(tau, dtype=float)
    slow = None if tau is None else np.exp(-gm * tau / 2)
    fast = None if tau is None else np.exp(-(gm + gp) * tau / 2)
    two_g = 2 * p.g
    lor11 = 4 * wm ** 2 / (gm ** 2 + 4 * wm ** 2)
    lor12 = gm ** 2 / (gm ** 2 + 4 * wm ** 2)
    if quantity == "ada":
        return 0.25 * (sum(n.values()) + 2 * k ** 2)
    if quantity == "phi11":
        return -3 * k * wm * (2 * nb + 1) * np.sin(wm * tau) * slow
    if quantity == "phi12":
        return 1.5 * k * gm * (nb - 1) * (2 * nb + 1) * np.cos(wm * tau) * slow
    if quantity == "phi12_closure":
        return -1.5 * k * gm * (2 * nb + 1) * np.cos(wm * tau) * slow
    if quantity == "Phi11_inf":
        return -3 * k * lor11 * (2 * nb + 1)
    if quantity == "Phi12_inf":
        return 3 * k * lor12 * (nb - 1) * (2 * nb + 1)
    if quantity == "Phi12_inf_closure":
        return -3 * k * lor12 * (2 * nb + 1)
    if quantity == "total_inf":
        return oscillator_reference("Phi11_inf", p) + oscillator_reference("Phi12_inf", p)
    if quantity == "f_coeffs":
        f2 = 0.5 * k * (np.cos(wm * tau) * slow - np.cos(two_g * tau) * fast)
        f3 = -0.5 * k * (np.sin(wm * tau) * slow + np.sin(two_g * tau) * fast)
        f4 = -0.5 * np.cos(two_g * tau) * fast
        f5 = -0.5 * np.sin(two_g * tau) * fast
        return np.array([f2, f3, f4, f5])
    raise ValueError(f"unknown oscillator quantity {quantity!r}")


# --------------------------------------------------------------------- qubits

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)
SIGMA_X = SIGMA_MINUS + SIGMA_MINUS.T
SIGMA_Y = 1j * (SIGMA_MINUS - SIGMA_MINUS.T)
I2 = np.eye(2)


def on_a(op):
    return np.kron(op, I2)


def on_b(op):
    return np.kron(I2, op)


@dataclass(frozen=True)
class QubitScenario:
    omega: float = 1000.0
    g: float = 200.0
    gamma_plus: float = 1.0
    gamma_minus: float = 1.0
    Omega: float = 100.0
    Ta: float = 60.0
    Tb: float = 40.0
    delta: float = 0.5

    def __post_init__(self):
        if not self.g < self.omega:
            raise ValueError("need g < omega")
        if self.Ta < 0 or self.Tb < 0:
            raise ValueError("temperatures must be non-negative")

    @property
    def omega_plus(self):
        return self.omega + self.g

    @property
    def omega_minus(self):
        return self.omega - self.g

    @property
    def Tbar(self):
        return 0.5 * (self.Ta + self.Tb)

    def with_(self, **kw):
        return replace(self, **kw)


def qubit_operators():
    sm = SIGMA_MINUS
    return {
        "sx_a": on_a(SIGMA_X), "sx_b": on_b(SIGMA_X),
        "sy_a": on_a(SIGMA_Y), "sy_b": on_b(SIGMA_Y),
        "sz_a": on_a(SIGMA_Z), "sz_b": on_b(SIGMA_Z),
        "sm_a": on_a(sm), "sm_b": on_b(sm),
        "a_plus": (on_a(sm) - on_a(SIGMA_Z) @ on_b(sm)) / 2,
        "a_minus": (on_a(sm) + on_a(SIGMA_Z) @ on_b(sm)) / 2,
        "b_plus": (on_b(sm) - on_a(sm) @ on_b(SIGMA_Z)) / 2,
        "b_minus": (on_b(sm) + on_a(sm) @ on_b(SIGMA_Z)) / 2,
    }


def qubit_hamiltonian(p):
    o = qubit_operators()
    H0 = p.omega / 2 * (o["sz_a"] + o["sz_b"]) + p.g / 2 * (o["sx_a"] @ o["sx_b"] + o["sy_a"] @ o["sy_b"])
    V = p.Omega * o["sz_a"] @ o["sz_b"]
    return H0, V


def qubit_rate_profile(p):
    return nearest_rate([(p.omega_minus, p.gamma_minus), (p.omega_plus, p.gamma_plus)])


def qubit_baths(p):
    o = qubit_operators()
    prof = qubit_rate_profile(p)
    return (BathSpec("a", o["sx_a"], p.Ta, prof), BathSpec("b", o["sx_b"], p.Tb, prof))


@dataclass(frozen=True, eq=False)
class QubitModel:
    params: QubitScenario
    H0: np.ndarray
    V: np.ndarray
    baths: tuple
    L0: Liouvillian

    def __iter__(self):
        return iter((self.H0, self.V, self.baths, self.L0))


def build_qubit_scenario(p, **kw):
    H0, V = qubit_hamiltonian(p)
    baths = qubit_baths(p)
    return QubitModel(p, H0, V, baths, build_liouvillian(H0, baths, **kw))


def explicit_qubit_generator(p):
    """Unperturbed qubit generator written with the a+-, b+- jump operators."""
    o = qubit_operators()
    H0, _ = qubit_hamiltonian(p)
    D = []
    for bath, T in (("a", p.Ta), ("b", p.Tb)):
        terms = []
        for l, w, gam in (("plus", p.omega_plus, p.gamma_plus), ("minus", p.omega_minus, p.gamma_minus)):
            chi = o[f"{bath}_{l}"]
            nn = bose_occupation(w, T)
            terms += [Term(gam * (nn + 1), chi, chi), Term(gam * nn, dag(chi), dag(chi))]
        D.append(Dissipator(bath, tuple(terms), T))
    return Liouvillian(H0, tuple(D))


def qubit_reference(quantity, p):
    """Closed-form steady-state currents from bath a: J0 and J1 (per unit delta)."""
    npa, npb = bose_occupation(p.omega_plus, p.Ta), bose_occupation(p.omega_plus, p.Tb)
    nma, nmb = bose_occupation(p.omega_minus, p.Ta), bose_occupation(p.omega_minus, p.Tb)
    if quantity == "J0":
        return (p.gamma_plus * p.omega_plus * (npa - npb) / (4 * (npa + npb + 1))
                + p.gamma_minus * p.omega_minus * (nma - nmb) / (4 * (nma + nmb + 1)))
    if quantity == "J1":
        return -(p.gamma_minus * p.Omega * (nma - nmb) + p.gamma_plus * p.Omega * (npa - npb)) / (
            2 * (nma + nmb + 1) * (npa + npb + 1))
    raise ValueError(f"unknown qubit quantity {quantity!r}")


def qubit_eigenstates():
    """|00>, |->, |+>, |11> as columns."""
    e = np.eye(4)
    s00, s01, s10, s11 = e[0], e[1], e[2], e[3]
    return {"00": s00, "-": (s01 - s10) / SQ2, "+": (s01 + s10) / SQ2, "11": s11}


def perturbed_qubit_channels(p):
    """[(omega_j, gamma_j, S_j)] for the four channels of H0 + delta V."""
    k = qubit_eigenstates()
    dO = p.delta * p.Omega
    wm, wp = p.omega_minus, p.omega_plus
    return [
        (wm - 2 * dO, p.gamma_minus, np.outer(k["00"], k["-"]) / SQ2),
        (wp - 2 * dO, p.gamma_plus, np.outer(k["00"], k["+"]) / SQ2),
        (wm + 2 * dO, p.gamma_minus, np.outer(k["+"], k["11"]) / SQ2),
        (wp + 2 * dO, p.gamma_plus, np.outer(k["-"], k["11"]) / SQ2),
    ]


def build_perturbed_qubit_global(p):
    """Four-channel generator of the perturbed qubit pair, assembled channel by channel."""
    if p.delta == 0:
        raise ValueError("delta must be non-zero")
    H0, V = qubit_hamiltonian(p)
    chans = perturbed_qubit_channels(p)
    D = []
    for bath, T in (("a", p.Ta), ("b", p.Tb)):
        terms, meta = [], []
        for w, gam, S in chans:
            if not w > 0:
                raise ValueError("perturbed Bohr frequency is not positive")
            nn = bose_occupation(w, T)
            S = S.astype(complex)
            terms += [Term(gam * (nn + 1), S, S), Term(gam * nn, dag(S), dag(S))]
            meta.append((w, gam * (nn + 1), gam * nn, S))
        D.append(Dissipator(bath, tuple(terms), T, tuple(meta)))
    return Liouvillian(H0 + p.delta * V, tuple(D))


def qubit_global_current(p, rho, bath="a"):
    """sum_j w_j (-gamma_j (n_j+1) <S_j^dag S_j> + gamma_j n_j <S_j S_j^dag>) for one bath."""
    T = p.Ta if bath == "a" else p.Tb
    J = 0.0
    for w, gam, S in perturbed_qubit_channels(p):
        nn = bose_occupation(w, T)
        J += w * (-gam * (nn + 1) * np.trace(rho @ dag(S) @ S).real
                  + gam * nn * np.trace(rho @ S @ dag(S)).real)
    return J


# -------------------------------------------------------------------- presets

PRESETS = {
    "fig2": ("oscillator", dict(omega=100.0, g=90.0, epsilon=5.0, gamma_plus=1.0, gamma_minus=1.0,
                                Ta=2000.0, Tb=2100.0, delta=0.02, nmax=8)),
    "fig2-deskscale": ("oscillator", dict(omega=100.0, g=90.0, epsilon=5.0, gamma_plus=1.0,
                                          gamma_minus=1.0, Ta=5.0, Tb=6.0, delta=0.02, nmax=8)),
    "fig3": ("qubit", dict(omega=1000.0, g=200.0, gamma_plus=1.0, gamma_minus=1.0, Omega=100.0,
                           Ta=60.0, Tb=40.0, delta=0.5)),
    "fig4-low-T": ("qubit", dict(omega=1000.0, g=200.0, gamma_plus=1.0, gamma_minus=1.0, Omega=100.0,
                                 Ta=60.0, Tb=40.0, delta=0.5)),
    "fig4-high-T": ("qubit", dict(omega=1000.0, g=200.0, gamma_plus=1.0, gamma_minus=1.0, Omega=100.0,
                                  Ta=5010.0, Tb=4990.0, delta=0.5)),
}


def preset(name):
    """Scenario object for a named parameter set."""
    try:
        kind, params = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    cls = OscillatorScenario if kind == "oscillator" else QubitScenario
    return cls(**params)

