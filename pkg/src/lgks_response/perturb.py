"""First-order stationary perturbation theory for H0 + delta V and its imprint on the generator."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import EigenSystem, as_operator, dag, eigendecompose_hermitian, group_levels
from .errors import (EigenvalueShiftPresent, NotSteady, RegimeWarning,
                     UnresolvedDegeneracy)
from .lgks import (Dissipator, Generator, Liouvillian, Term, bath_rate,
                   build_liouvillian, propagate_samples, solve_traceless)


@dataclass(frozen=True, eq=False)
class PerturbationExpansion:
    """First-order corrections in the (possibly rotated) unperturbed eigenbasis.

    eig carries the rotated zeroth-order vectors; psi1[:, n] holds the
    coefficients of the first-order correction of level n in that basis.
    degenerate_blocks lists the groups in which V was diagonalized.
    """
    eig: EigenSystem
    V: np.ndarray
    E1: np.ndarray
    psi1: np.ndarray
    degenerate_blocks: tuple

    @property
    def E0(self):
        return self.eig.values

    def first_order_vectors(self):
        """|psi_n^(1)> as columns, in the original basis."""
        return self.eig.vectors @ self.psi1

    def delta_projector(self, k):
        """First-order change of the spectral projector of group k."""
        idx = list(self.eig.groups[k])
        P1 = self.eig.vectors @ self.psi1[:, idx]
        P0 = self.eig.vectors[:, idx]
        X = P1 @ dag(P0)
        return X + dag(X)

    def eigenpair_residual(self, H0, delta):
        """max_n ||(H0 + dV)(psi0 + d psi1) - (E0 + d E1)(psi0 + d psi1)||."""
        psi = self.eig.vectors + delta * self.first_order_vectors()
        H = H0 + delta * self.V
        lam = self.E0 + delta * self.E1
        return float(np.max(np.linalg.norm(H @ psi - psi * lam[None, :], axis=0)))


def first_order_corrections(eig, V, tol=1e-12):
    """Rayleigh-Schrodinger first order; V is diagonalized inside each degenerate group."""
    V = as_operator(V, hermitian=True, name="V")
    U = eig.vectors.copy()
    Veb = dag(U) @ V @ U
    scale = max(np.max(np.abs(V)), 1e-300)
    blocks = []
    for grp in eig.groups:
        if len(grp) > 1:
            idx = list(grp)
            w, W = np.linalg.eigh(0.5 * (Veb[np.ix_(idx, idx)] + dag(Veb[np.ix_(idx, idx)])))
            U[:, idx] = U[:, idx] @ W
            blocks.append(tuple(grp))
    Veb = dag(U) @ V @ U
    E1 = np.real(np.diag(Veb)).copy()
    d = eig.dim
    label = np.empty(d, dtype=int)
    for k, grp in enumerate(eig.groups):
        label[list(grp)] = k
    E = eig.values
    same = label[:, None] == label[None, :]
    denom = np.where(same, 1.0, E[None, :] - E[:, None])   # E_n - E_m
    psi1 = np.where(same, 0.0, Veb / denom)

    # levels left degenerate by V must not be mixed at second order
    for grp in blocks:
        idx = np.array(grp)
        for sub in group_levels(E1[idx], tol * scale):
            if len(sub) < 2:
                continue
            members = idx[list(sub)]
            out = np.setdiff1d(np.arange(d), idx)
            if out.size == 0:
                continue
            Eg = np.mean(E[idx])
            C = Veb[np.ix_(members, out)] @ (Veb[np.ix_(out, members)] / (Eg - E[out])[:, None])
            off = C - np.diag(np.diag(C))
            if np.max(np.abs(off)) > tol * scale:
                raise UnresolvedDegeneracy(f"levels {members.tolist()} stay degenerate at first order "
                                           "but couple at second order")
    rot = EigenSystem(E, U, eig.groups, eig.degeneracy_tol)
    return PerturbationExpansion(rot, V, E1, psi1, tuple(blocks))


def _check_no_shift(exp, tol):
    spread = float(np.max(exp.E1) - np.min(exp.E1))
    norm = max(np.linalg.norm(exp.V, 2), 1e-300)
    if spread > tol * norm:
        raise EigenvalueShiftPresent(
            f"first-order level shifts differ by {spread:.3g}; Bohr frequencies move with delta")


def expand_coupling_operators(exp, dec, S=None, tol=1e-9):
    """[(omega, S0(omega), S1(omega))] for every channel of dec.

    S1 collects the first-order projector corrections,
    S1 = sum (dPi_k S Pi_l + Pi_k S dPi_l) over the pairs of the channel.
    Valid only when the perturbation leaves all Bohr frequencies unchanged.
    """
    _check_no_shift(exp, tol)
    S = dec.coupling if S is None else as_operator(S, hermitian=True, name="S")
    G = len(exp.eig.groups)
    P0 = [exp.eig.projector(k) for k in range(G)]
    P1 = [exp.delta_projector(k) for k in range(G)]
    out = []
    for ch in dec.channels:
        S1 = np.zeros_like(S)
        by_k = {}
        for k, l in ch.pairs:
            by_k.setdefault(k, []).append(l)
        for k, ls in by_k.items():
            right0 = sum(P0[l] for l in ls)
            right1 = sum(P1[l] for l in ls)
            S1 += P1[k] @ S @ right0 + P0[k] @ S @ right1
        out.append((ch.omega, ch.jump, S1))
    return out


def build_first_order_dissipator(bath, channels):
    """D1 = sum_omega Gamma(omega)(S0 X S1^dag - 1/2{S1^dag S0, X}) + h.c., both signs of omega."""
    terms = []
    for omega, S0, S1 in channels:
        gp, gm = bath_rate(bath, omega)
        if not np.any(S1):
            continue
        S0d, S1d = dag(S0), dag(S1)
        if gp:
            terms += [Term(gp, S0, S1), Term(gp, S1, S0)]
        if gm:
            terms += [Term(gm, S0d, S1d), Term(gm, S1d, S0d)]
    return Dissipator(bath.label, tuple(terms), bath.temperature)


class FirstOrderGenerator(Generator):
    """L1 X = -i[V, X] + sum over baths of D1 X."""

    @property
    def V(self):
        return self.hamiltonian

    @property
    def D1_per_bath(self):
        return self.dissipators


def build_first_order_generator(V, D1_list=()):
    return FirstOrderGenerator(as_operator(V, hermitian=True, name="V"), tuple(D1_list))


def first_order_pipeline(H0, V, baths, freq_cluster_tol=None, zero_frequency="error", tol=1e-9):
    """(L0, L1, expansion) for H0 + delta V in the eigenvector-only regime."""
    L0 = build_liouvillian(H0, baths, freq_cluster_tol, zero_frequency)
    eig = L0.dissipators[0].decomposition.eig if L0.dissipators else eigendecompose_hermitian(H0)
    exp = first_order_corrections(eig, V)
    D1 = []
    for bath, D in zip(baths, L0.dissipators):
        ch = expand_coupling_operators(exp, D.decomposition, tol=tol)
        D1.append(build_first_order_dissipator(bath, ch))
    return L0, build_first_order_generator(V, D1), exp


def check_steady(L0, pi0, tol=1e-8):
    res = np.linalg.norm(L0.apply(pi0))
    if res > tol * max(1.0, L0.norm_estimate()):
        raise NotSteady(f"reference state residual {res:.3g}")


def stationary_first_order_state(L0, L1, pi0):
    """pi1 = rho1(t -> infinity): the traceless solution of L0 pi1 = -L1 pi0."""
    check_steady(L0, pi0)
    return solve_traceless(L0, -L1.apply(pi0))


def first_order_states(L0, L1, pi0, times, dt=None, observe=None, method="auto"):
    """rho1(t) = int_0^t exp(L0 tau) L1 pi0 dtau at ascending times.

    Uses rho1(t) = pi1 - exp(L0 t) pi1 with pi1 the stationary solution, so
    only a homogeneous propagation is needed.
    """
    pi1 = stationary_first_order_state(L0, L1, pi0)
    observe = (lambda X: X) if observe is None else observe
    times = np.asarray(times, dtype=float)
    finite = times[np.isfinite(times)]
    if method == "auto":
        method = "exact" if L0.is_secular else "rk4"
    res = propagate_samples(L0, pi1, finite, dt, "schrodinger",
                            observe=lambda X: observe(pi1 - X), method=method)
    out, it = [], iter(res)
    for t in times:
        out.append(next(it) if np.isfinite(t) else observe(pi1))
    return out


def first_order_state(L0, L1, pi0, t, dt=None):
    return first_order_states(L0, L1, pi0, [t], dt)[0]


@dataclass(frozen=True)
class RegimeReport:
    nu1: float
    gamma_scale: float
    regime: str


def classify_regime(exp, delta, gamma_scale, decompositions=None,
                    local_threshold=0.1, global_threshold=10.0):
    """nu1 = largest first-order splitting of an unperturbed Bohr channel.

    Pairs of levels sharing a channel move apart by |delta (dE1_a - dE1_b)|;
    nu1 is the largest such spread.
    """
    E1 = exp.E1
    if decompositions is None:
        G = len(exp.eig.groups)
        e = np.array([exp.eig.group_energy(k) for k in range(G)])
        gaps = e[None, :] - e[:, None]
        kk, ll = np.nonzero(gaps > exp.eig.degeneracy_tol)
        g = gaps[kk, ll]
        order = np.argsort(g)
        span = e[-1] - e[0] if G > 1 else 0.0
        clusters = [list(zip(kk[order[list(c)]], ll[order[list(c)]]))
                    for c in group_levels(g[order], 1e-6 * span)] if g.size else []
    else:
        clusters = [ch.pairs for dec in decompositions for ch in dec.channels]
    groups = exp.eig.groups
    e1 = np.array([np.mean(E1[list(grp)]) for grp in groups])
    nu1 = 0.0
    for pairs in clusters:
        shifts = [e1[l] - e1[k] for k, l in pairs]
        if shifts:
            nu1 = max(nu1, abs(delta) * (max(shifts) - min(shifts)))
    if nu1 < local_threshold * gamma_scale:
        regime = "local"
    elif nu1 > global_threshold * gamma_scale:
        regime = "global"
    else:
        regime = "intermediate"
    return RegimeReport(float(nu1), float(gamma_scale), regime)


def _gamma_scale(L0):
    # gamma(omega) = Gamma(omega) - Gamma(-omega)
    return max([gp - gm for D in L0.dissipators for (_, gp, gm, _) in D.channels] or [1.0])


def build_local_perturbed(H0, V, delta, baths, check_regime=True, **kw):
    """-i[H0 + delta V, .] with the unperturbed dissipators."""
    L0 = build_liouvillian(H0, baths, **kw)
    if check_regime and delta != 0:
        exp = first_order_corrections(eigendecompose_hermitian(H0), V)
        rep = classify_regime(exp, delta, _gamma_scale(L0),
                              [D.decomposition for D in L0.dissipators])
        if rep.regime != "local":
            warnings.warn(f"local generator used in the {rep.regime} regime "
                          f"(nu1={rep.nu1:.3g}, gamma={rep.gamma_scale:.3g})", RegimeWarning,
                          stacklevel=2)
    return Liouvillian(np.asarray(H0) + delta * np.asarray(V), L0.dissipators, L0.mode)


def build_global_perturbed(H0, V, delta, baths, **kw):
    """Generator rebuilt in the eigenbasis of H0 + delta V."""
    return build_liouvillian(np.asarray(H0) + delta * np.asarray(V), baths, **kw)


@dataclass(frozen=True, eq=False)
class FirstOrderProblem:
    """H0, V and the generators L0, L1 of an eigenvector-only perturbation."""
    H0: np.ndarray
    V: np.ndarray
    L0: Generator
    L1: Generator

    def restricted(self, labels):
        return FirstOrderProblem(self.H0, self.V, self.L0.restricted(labels), self.L1.restricted(labels))


def first_order_problem(H0, V, baths, **kw):
    L0, L1, _ = first_order_pipeline(H0, V, baths, **kw)
    return FirstOrderProblem(np.asarray(H0, dtype=complex), np.asarray(V, dtype=complex), L0, L1)
