"""LGKS generators from a Hamiltonian and a set of thermal baths.

A generator is stored as a Hamiltonian plus, per bath, a list of bilinear
terms (rate, L, R) acting as

    X -> rate * (L X R^dag - 1/2 {R^dag L, X}).

Ordinary Lindblad channels have L = R = S(omega). The adjoint is taken with
respect to the pairing Tr((L rho) A) = Tr(rho L^dag(A)), so

    L^dag(A) = i[H, A] + sum rate * (R^dag A L - 1/2 {R^dag L, A}).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import linalg as sla
from scipy import sparse

from .core import (EigenSystem, as_operator, dag, eigendecompose_hermitian,
                   group_levels, unvec, vec)
from .errors import (DimensionMismatch, NegativeRate, NoConvergence,
                     NonpositiveFrequency, NonUniqueSteadyState, UnknownBath,
                     UnstableStep, ZeroFrequencyChannel)

STABILITY_FACTOR = 0.1
FREQUENCY_TOL = 1e-12


def bose_occupation(omega, T):
    """Bose-Einstein occupation 1/(exp(omega/T) - 1); exactly 0 at T = 0."""
    if not omega > 0:
        raise NonpositiveFrequency(f"omega must be positive, got {omega}")
    if T < 0:
        raise ValueError("temperature must be non-negative")
    if T == 0:
        return 0.0
    return 1.0 / math.expm1(omega / T)


def flat_rate(gamma):
    """Rate profile that is constant in frequency."""
    gamma = float(gamma)

    def profile(omega):
        return gamma
    return profile


def nearest_rate(points):
    """Piecewise-constant profile taking the rate of the nearest listed frequency.

    points: sequence of (omega, gamma).
    """
    pts = sorted((float(w), float(g)) for w, g in points)

    def profile(omega):
        return min(pts, key=lambda p: abs(p[0] - omega))[1]
    return profile


@dataclass(frozen=True, eq=False)
class BathSpec:
    label: str
    coupling: np.ndarray
    temperature: float
    rate_profile: Callable = field(default=flat_rate(1.0))

    def __post_init__(self):
        object.__setattr__(self, "coupling", as_operator(self.coupling, hermitian=True,
                                                         name=f"coupling of bath {self.label}"))
        if not self.temperature >= 0:
            raise ValueError(f"bath {self.label}: temperature must be >= 0")


def bath_rate(bath, omega, frequency_tol=FREQUENCY_TOL):
    """(Gamma(|omega|), Gamma(-|omega|)) = gamma(|omega|) * (n + 1, n)."""
    w = abs(omega)
    if w <= frequency_tol:
        raise ZeroFrequencyChannel(f"bath {bath.label}: zero-frequency channel has no defined rate")
    gamma = float(bath.rate_profile(w))
    if gamma < 0:
        raise NegativeRate(f"bath {bath.label}: rate profile gives {gamma} at omega={w}")
    n = bose_occupation(w, bath.temperature)
    return gamma * (n + 1.0), gamma * n


@dataclass(frozen=True, eq=False)
class Channel:
    """One positive Bohr frequency with its jump operator S(omega).

    pairs lists the (k, l) group index pairs of the reference spectrum with
    E_l - E_k in this cluster; S(omega) = sum Pi_k S Pi_l.
    """
    omega: float
    jump: np.ndarray
    pairs: tuple


@dataclass(frozen=True, eq=False)
class BohrDecomposition:
    channels: tuple
    zero: np.ndarray
    eig: EigenSystem
    coupling: np.ndarray
    cluster_tol: float
    zero_pairs: tuple = ()

    @property
    def frequencies(self):
        return np.array([c.omega for c in self.channels])

    def zero_is_trivial(self, tol=1e-12):
        """True if S(0) is proportional to the identity (it then drops out of any dissipator)."""
        d = self.zero.shape[0]
        c = np.trace(self.zero) / d
        scale = max(np.max(np.abs(self.coupling)), 1e-300)
        return np.max(np.abs(self.zero - c * np.eye(d))) <= tol * scale

    def reconstruct(self):
        S = self.zero.copy()
        for c in self.channels:
            S = S + c.jump + dag(c.jump)
        return S


def bohr_decompose(S, eig, freq_cluster_tol=None):
    """Split S into eigenoperators of ad_H.

    Gaps closer than freq_cluster_tol (default 1e-6 of the largest gap) are
    merged by single linkage. Only clusters with a non-negligible jump are
    returned as channels; the omega = 0 part is kept in `zero`.
    """
    S = as_operator(S, hermitian=True, name="S")
    if S.shape[0] != eig.dim:
        raise DimensionMismatch(f"S has dim {S.shape[0]}, spectrum has dim {eig.dim}")
    G = len(eig.groups)
    e = np.array([eig.group_energy(k) for k in range(G)])
    label = np.empty(eig.dim, dtype=int)
    for k, grp in enumerate(eig.groups):
        label[list(grp)] = k
    gaps = e[None, :] - e[:, None]          # gaps[k, l] = E_l - E_k
    if freq_cluster_tol is None:
        freq_cluster_tol = 1e-6 * (e[-1] - e[0])
    kk, ll = np.nonzero(gaps >= 0)
    gvals = gaps[kk, ll]
    order = np.argsort(gvals, kind="stable")
    clusters = group_levels(gvals[order], freq_cluster_tol)

    Seb = eig.to_eigenbasis(S)
    w2 = np.abs(Seb) ** 2
    pair_cluster = -np.ones((G, G), dtype=int)
    cluster_pairs = []
    for c, members in enumerate(clusters):
        idx = order[list(members)]
        pair_cluster[kk[idx], ll[idx]] = c
        cluster_pairs.append(tuple(zip(kk[idx].tolist(), ll[idx].tolist())))
    zero_c = pair_cluster[0, 0]
    # zero cluster pairs act both ways
    zk, zl = np.nonzero(pair_cluster == zero_c)
    pair_cluster[zl, zk] = zero_c
    elem_cluster = pair_cluster[label[:, None], label[None, :]]

    scale = max(np.max(np.abs(S)), 1e-300)
    zero = eig.from_eigenbasis(np.where(elem_cluster == zero_c, Seb, 0))
    channels = []
    for c, members in enumerate(clusters):
        if c == zero_c:
            continue
        mask = elem_cluster == c
        Jeb = np.where(mask, Seb, 0)
        if np.max(np.abs(Jeb)) <= 1e-14 * scale:
            continue
        gap_el = (eig.values[None, :] - eig.values[:, None])[mask]
        wts = w2[mask]
        omega = float(np.sum(wts * gap_el) / np.sum(wts))
        channels.append(Channel(omega, eig.from_eigenbasis(Jeb), cluster_pairs[c]))
    channels.sort(key=lambda ch: ch.omega)
    return BohrDecomposition(tuple(channels), zero, eig, S, float(freq_cluster_tol),
                             cluster_pairs[zero_c])


@dataclass(frozen=True, eq=False)
class Term:
    """rate * (L X R^dag - 1/2 {R^dag L, X})."""
    rate: float
    left: np.ndarray
    right: np.ndarray


class _Batch:
    """Terms stacked for vectorized application."""

    def __init__(self, terms, d):
        self.d = d
        if terms:
            self.rates = np.array([t.rate for t in terms], dtype=float)
            self.L = np.array([t.left for t in terms])
            self.Rd = np.array([dag(t.right) for t in terms])
            self.K = np.tensordot(self.rates, self.Rd @ self.L, axes=1)
        else:
            self.rates = np.zeros(0)
            self.L = self.Rd = np.zeros((0, d, d), dtype=complex)
            self.K = np.zeros((d, d), dtype=complex)

    def apply(self, X):
        out = -0.5 * (self.K @ X + X @ self.K)
        if self.rates.size:
            out += np.tensordot(self.rates, (self.L @ X) @ self.Rd, axes=1)
        return out

    def apply_adjoint(self, A):
        out = -0.5 * (self.K @ A + A @ self.K)
        if self.rates.size:
            out += np.tensordot(self.rates, (self.Rd @ A) @ self.L, axes=1)
        return out

    def transformed(self, U):
        b = _Batch([], self.d)
        b.rates = self.rates
        b.L = dag(U)[None] @ self.L @ U[None]
        b.Rd = dag(U)[None] @ self.Rd @ U[None]
        b.K = dag(U) @ self.K @ U
        return b


@dataclass(frozen=True, eq=False)
class Dissipator:
    """Dissipator of one bath.

    channels records (omega, Gamma(omega), Gamma(-omega), S(omega)) for the
    Lindblad channels it was built from; terms is the full bilinear list.
    """
    label: str
    terms: tuple
    temperature: float | None = None
    channels: tuple = ()
    decomposition: BohrDecomposition | None = None

    @cached_property
    def _batch(self):
        d = self.terms[0].left.shape[0] if self.terms else 0
        return _Batch(list(self.terms), d)

    def apply(self, X):
        if not self.terms:
            return np.zeros_like(X, dtype=complex)
        return self._batch.apply(X)

    def apply_adjoint(self, A):
        if not self.terms:
            return np.zeros_like(A, dtype=complex)
        return self._batch.apply_adjoint(A)


def _term_dense(t, d):
    I = np.eye(d)
    K = dag(t.right) @ t.left
    return t.rate * (np.kron(np.conj(t.right), t.left)
                     - 0.5 * np.kron(I, K) - 0.5 * np.kron(K.T, I))


def _term_dense_adjoint(t, d):
    I = np.eye(d)
    K = dag(t.right) @ t.left
    return t.rate * (np.kron(t.left.T, dag(t.right))
                     - 0.5 * np.kron(I, K) - 0.5 * np.kron(K.T, I))


@dataclass(frozen=True, eq=False)
class Generator:
    """-i[H, .] plus a sum of per-bath dissipators. Immutable once built."""
    hamiltonian: np.ndarray
    dissipators: tuple = ()
    mode: str = "matrix-free"

    def __post_init__(self):
        object.__setattr__(self, "hamiltonian", as_operator(self.hamiltonian, name="H"))
        object.__setattr__(self, "dissipators", tuple(self.dissipators))
        for D in self.dissipators:
            for t in D.terms:
                if t.left.shape != self.hamiltonian.shape or t.right.shape != self.hamiltonian.shape:
                    raise DimensionMismatch(f"bath {D.label}: operator shape differs from H")
        if self.mode not in ("matrix-free", "dense"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    @property
    def labels(self):
        return tuple(D.label for D in self.dissipators)

    def dissipator(self, label):
        for D in self.dissipators:
            if D.label == label:
                return D
        raise UnknownBath(f"no bath labelled {label!r}; have {self.labels}")

    def restricted(self, labels):
        """Same Hamiltonian with only the named baths."""
        labels = [labels] if isinstance(labels, str) else list(labels)
        return replace(self, dissipators=tuple(self.dissipator(l) for l in labels))

    @cached_property
    def _batch(self):
        terms = [t for D in self.dissipators for t in D.terms]
        return _Batch(terms, self.dim)

    def apply(self, X):
        if self.mode == "dense":
            return unvec(self.dense() @ vec(X), self.dim)
        H = self.hamiltonian
        return -1j * (H @ X - X @ H) + self._batch.apply(X)

    def apply_adjoint(self, A):
        if self.mode == "dense":
            return unvec(self.dense_adjoint() @ vec(A), self.dim)
        H = self.hamiltonian
        return 1j * (H @ A - A @ H) + self._batch.apply_adjoint(A)

    def apply_dissipative(self, X):
        return self._batch.apply(X)

    def apply_dissipative_adjoint(self, A):
        return self._batch.apply_adjoint(A)

    def dense(self, include_hamiltonian=True):
        return self._dense(include_hamiltonian, adjoint=False)

    def dense_adjoint(self, include_hamiltonian=True):
        return self._dense(include_hamiltonian, adjoint=True)

    def _dense(self, include_hamiltonian, adjoint):
        key = ("_dense_cache", include_hamiltonian, adjoint)
        cache = self.__dict__.setdefault("_dense_cache", {})
        if key in cache:
            return cache[key]
        d = self.dim
        I = np.eye(d)
        M = np.zeros((d * d, d * d), dtype=complex)
        if include_hamiltonian:
            H = self.hamiltonian
            comm = np.kron(I, H) - np.kron(H.T, I)
            M += 1j * comm if adjoint else -1j * comm
        f = _term_dense_adjoint if adjoint else _term_dense
        for D in self.dissipators:
            for t in D.terms:
                M += f(t, d)
        cache[key] = M
        return M

    def norm_estimate(self, include_hamiltonian=True):
        """Cheap upper bound on the operator norm of the generator."""
        total = 0.0
        for D in self.dissipators:
            for t in D.terms:
                total += abs(t.rate) * (np.linalg.norm(t.left, 2) * np.linalg.norm(t.right, 2)
                                        + np.linalg.norm(dag(t.right) @ t.left, 2))
        if include_hamiltonian:
            E = np.linalg.eigvalsh(0.5 * (self.hamiltonian + dag(self.hamiltonian)))
            total += E[-1] - E[0]
        return total

    @cached_property
    def frame(self):
        return _EigenFrame(self)

    @property
    def is_secular(self):
        """True if the dissipative part commutes with ad_H."""
        return self.frame.secular


class Liouvillian(Generator):
    """Generator of a Markovian master equation."""


class _EigenFrame:
    """The generator expressed in the eigenbasis of its Hamiltonian."""

    def __init__(self, gen):
        H = gen.hamiltonian
        E, U = np.linalg.eigh(0.5 * (H + dag(H)))
        self.E, self.U = E, U
        span = E[-1] - E[0]
        self.tol = 1e-9 * max(1.0, span)
        self.batch = gen._batch.transformed(U)
        self.secular = self._check_secular()

    def _check_secular(self):
        nu = self.E[None, :] - self.E[:, None]     # nu[m, n] = E_n - E_m
        b = self.batch
        for k in range(b.rates.size):
            freqs = []
            for M in (b.L[k], dag(b.Rd[k])):
                big = np.abs(M) > 1e-12 * max(np.max(np.abs(M)), 1e-300)
                freqs.append(nu[big])
            f = np.concatenate(freqs)
            if f.size and f.max() - f.min() > self.tol:
                return False
        return True

    def to_eb(self, X):
        return dag(self.U) @ X @ self.U

    def from_eb(self, X):
        return self.U @ X @ dag(self.U)

    def phases(self, t, picture):
        s = -1j if picture == "schrodinger" else 1j
        return np.exp(s * (self.E[:, None] - self.E[None, :]) * t)

    def sectors(self):
        """Index pairs (m, n) grouped by E_m - E_n."""
        d = len(self.E)
        nu = (self.E[:, None] - self.E[None, :]).reshape(-1)
        order = np.argsort(nu, kind="stable")
        out = []
        for grp in group_levels(nu[order], 10 * self.tol):
            idx = order[list(grp)]
            out.append((idx // d, idx % d, float(np.mean(nu[idx]))))
        return out

    def block(self, mm, nn, nu):
        """Matrix of the generator restricted to entries (mm[i], nn[i]) in the eigenbasis."""
        b = self.batch
        M = np.diag(-1j * (self.E[mm] - self.E[nn])).astype(complex)
        if b.rates.size:
            Lsub = b.L[:, mm[:, None], mm[None, :]]
            Rsub = b.Rd[:, nn[None, :], nn[:, None]]
            M += np.einsum("k,kab,kab->ab", b.rates, Lsub, Rsub)
        same_n = nn[:, None] == nn[None, :]
        same_m = mm[:, None] == mm[None, :]
        M -= 0.5 * b.K[mm[:, None], mm[None, :]] * same_n
        M -= 0.5 * b.K[nn[None, :], nn[:, None]] * same_m
        return M


    def blocks(self):
        if not hasattr(self, "_blocks"):
            self._blocks = [(mm, nn, self.block(mm, nn, nu)) for mm, nn, nu in self.sectors()]
        return self._blocks

    def exact_step(self, h, picture):
        """exp(L h) (schrodinger) or exp(L^dag h) (heisenberg) on the eigenbasis entries.

        Sparse matrix acting on the row-major flattening of the eigenbasis
        representation, assembled from per-sector exponentials and cached by h.
        """
        cache = self.__dict__.setdefault("_steps", {})
        key = (round(h, 14), picture)
        if key not in cache:
            d = len(self.E)
            rows, cols, vals = [], [], []
            for mm, nn, B in self.blocks():
                if picture == "schrodinger":
                    idx, P = mm * d + nn, sla.expm(B * h)
                else:
                    # the A entry (n, m) pairs with the X entry (m, n)
                    idx, P = nn * d + mm, sla.expm(B.T * h)
                k = len(idx)
                rows.append(np.repeat(idx, k))
                cols.append(np.tile(idx, k))
                vals.append(P.reshape(-1))
            M = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                  shape=(d * d, d * d))
            if len(cache) > 64:
                cache.clear()
            cache[key] = M
        return cache[key]


def _exact_samples(L, X, times, picture, observe, eigenbasis=False):
    """Sector-exact propagation; observe sees the eigenbasis form if eigenbasis is set."""
    fr = L.frame
    d = L.dim
    y = fr.to_eb(X).reshape(-1)
    out, t_now = [], 0.0
    for t in times:
        h = t - t_now
        if h > 0:
            y = fr.exact_step(h, picture) @ y
            t_now = t
        Y = y.reshape(d, d)
        out.append(observe(Y if eigenbasis else fr.from_eb(Y)))
    return out


def build_dissipator(bath, dec, zero_frequency="error"):
    """Lindblad dissipator of one bath from its Bohr decomposition.

    zero_frequency: "error" rejects a non-trivial omega = 0 component, "drop"
    discards it, a number is used as the dephasing rate for S(0). A component
    proportional to the identity never contributes and is always dropped.
    """
    terms, chans = [], []
    for ch in dec.channels:
        gp, gm = bath_rate(bath, ch.omega)
        S = ch.jump
        chans.append((ch.omega, gp, gm, S))
        if gp != 0:
            terms.append(Term(gp, S, S))
        if gm != 0:
            Sd = dag(S)
            terms.append(Term(gm, Sd, Sd))
    if not dec.zero_is_trivial():
        if zero_frequency == "error":
            raise ZeroFrequencyChannel(
                f"bath {bath.label}: coupling has an omega=0 component; "
                "pass zero_frequency='drop' or a dephasing rate")
        if zero_frequency != "drop":
            rate = float(zero_frequency)
            if rate < 0:
                raise NegativeRate(f"bath {bath.label}: negative dephasing rate")
            if rate:
                terms.append(Term(rate, dec.zero, dec.zero))
    return Dissipator(bath.label, tuple(terms), bath.temperature, tuple(chans), dec)


def build_liouvillian(H, baths, freq_cluster_tol=None, zero_frequency="error",
                      mode="matrix-free", degeneracy_tol=None):
    """-i[H, .] + sum over baths of the secular (Davies) dissipator built in the eigenbasis of H."""
    H = as_operator(H, hermitian=True, name="H")
    eig = eigendecompose_hermitian(H, degeneracy_tol)
    dissipators = []
    for bath in baths:
        if bath.coupling.shape != H.shape:
            raise DimensionMismatch(f"bath {bath.label}: coupling shape differs from H")
        dec = bohr_decompose(bath.coupling, eig, freq_cluster_tol)
        dissipators.append(build_dissipator(bath, dec, zero_frequency))
    labels = [D.label for D in dissipators]
    if len(set(labels)) != len(labels):
        raise ValueError("bath labels must be unique")
    return Liouvillian(H, tuple(dissipators), mode)


def apply_adjoint(L, A):
    A = np.asarray(A, dtype=complex)
    if A.shape != (L.dim, L.dim):
        raise DimensionMismatch(f"operator shape {A.shape} vs generator dim {L.dim}")
    return L.apply_adjoint(A)


def max_stable_step(L, frame="lab", stability_factor=STABILITY_FACTOR):
    est = L.norm_estimate(include_hamiltonian=(frame == "lab"))
    return np.inf if est == 0 else stability_factor / est


def _choose_frame(L, frame):
    if frame == "auto":
        return "rotating" if L.is_secular else "lab"
    if frame == "rotating" and not L.is_secular:
        raise ValueError("rotating frame needs a dissipator that commutes with ad_H")
    if frame not in ("lab", "rotating"):
        raise ValueError(f"unknown frame {frame!r}")
    return frame


def propagate(L, X, t, dt=None, picture="schrodinger", frame="auto",
              stability_factor=STABILITY_FACTOR, method="rk4"):
    """X(t) = exp(L t) X (schrodinger) or exp(L^dag t) X (heisenberg), by fixed-step RK4 by default."""
    out = propagate_samples(L, X, [t], dt, picture, frame, stability_factor, method=method)
    return out[0]


def propagate_samples(L, X, times, dt=None, picture="schrodinger", frame="auto",
                      stability_factor=STABILITY_FACTOR, observe=None, method="rk4"):
    """Propagate X through ascending sample times and return observe(X(t)) at each.

    method "exact" (secular generators only) exponentiates the generator
    block of every Bohr-frequency sector once per distinct sample spacing
    and ignores dt; "rk4" is the general fixed-step integrator.

    With frame "rotating" (default for secular generators) RK4 integrates only
    the dissipator in the interaction picture and the unitary part is applied
    exactly as phases in the eigenbasis of H. The step is the largest value
    not exceeding dt (default stability_factor / norm estimate) that lands on
    every sample time.
    """
    if picture not in ("schrodinger", "heisenberg"):
        raise ValueError(f"unknown picture {picture!r}")
    times = np.asarray(times, dtype=float)
    if times.size and (times[0] < 0 or np.any(np.diff(times) < 0)):
        raise ValueError("sample times must be ascending and non-negative")
    X = as_operator(X, name="X")
    if X.shape != (L.dim, L.dim):
        raise DimensionMismatch(f"operator shape {X.shape} vs generator dim {L.dim}")
    observe = (lambda Y: Y) if observe is None else observe
    if method == "exact":
        if not L.is_secular:
            raise ValueError("exact propagation needs a secular generator")
        return _exact_samples(L, X, times, picture, observe)
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")
    frame = _choose_frame(L, frame)
    dt_max = max_stable_step(L, frame, stability_factor)
    if dt is None:
        dt = dt_max
    elif dt > dt_max * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stability bound {dt_max:.3g}")

    if frame == "rotating":
        fr = L.frame
        b = fr.batch
        f = b.apply if picture == "schrodinger" else b.apply_adjoint
        Y = fr.to_eb(X)

        def emit(Y, t):
            return observe(fr.from_eb(Y * fr.phases(t, picture)))
    else:
        f = L.apply if picture == "schrodinger" else L.apply_adjoint
        Y = X.copy()

        def emit(Y, t):
            return observe(Y)

    n0 = np.linalg.norm(Y)
    limit = 1e3 * max(n0, 1e-300)
    out, t_now = [], 0.0
    for t in times:
        span = t - t_now
        if span > 0:
            n = max(1, int(math.ceil(span / dt - 1e-9)))
            h = span / n
            for _ in range(n):
                k1 = f(Y)
                k2 = f(Y + 0.5 * h * k1)
                k3 = f(Y + 0.5 * h * k2)
                k4 = f(Y + h * k3)
                Y = Y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.linalg.norm(Y) <= limit:
                raise UnstableStep(f"norm grew beyond 1e3 x initial by t={t}")
            t_now = t
        out.append(emit(Y, t_now))
    return out


def residual(L, rho):
    return np.linalg.norm(L.apply(rho))


def _normalize_state(rho):
    rho = 0.5 * (rho + dag(rho))
    return rho / np.trace(rho).real


def steady_state(L, method="nullspace", tol=1e-9, max_time=None):
    """Unique stationary state of L.

    nullspace: secular generators are solved in the zero sector of ad_H
    only (block diagonal structure); others use an SVD of the dense
    generator, or an LU solve with the trace condition for d^2 > 1600.
    longtime: RK4 from the maximally mixed state until ||L rho|| < tol ||L||.
    """
    d = L.dim
    scale = max(L.norm_estimate(), 1e-300)
    if method == "nullspace":
        if L.is_secular:
            rho = _sector_nullspace(L)
        elif d * d <= 1600:
            rho = _dense_nullspace(L.dense())
        elif d * d <= 4096:
            rho = _bordered_solve(L)
        else:
            raise ValueError("nullspace method needs d^2 <= 4096 for non-secular generators; use longtime")
        rho = _normalize_state(rho)
    elif method == "longtime":
        rho = _longtime(L, tol * scale, max_time)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = residual(L, rho)
    if res > tol * scale:
        raise NoConvergence(f"steady-state residual {res:.3g} exceeds {tol * scale:.3g}")
    return rho


def _check_unique(s):
    if s.size > 1 and s[-2] <= 1e-10 * s[0]:
        raise NonUniqueSteadyState("null space of the generator is degenerate")


def _dense_nullspace(M):
    _, s, Vh = np.linalg.svd(M)
    _check_unique(s)
    return unvec(np.conj(Vh[-1]))


def _sector_nullspace(L):
    fr = L.frame
    d = L.dim
    for mm, nn, nu in fr.sectors():
        if abs(nu) <= 10 * fr.tol:
            M = fr.block(mm, nn, 0.0)
            _, s, Vh = np.linalg.svd(M)
            _check_unique(s)
            Y = np.zeros((d, d), dtype=complex)
            Y[mm, nn] = np.conj(Vh[-1])
            return fr.from_eb(Y)
    raise NonUniqueSteadyState("no zero sector found")


def _bordered_solve(L):
    d = L.dim
    M = L.dense().copy()
    M[0, :] = vec(np.eye(d))
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        lu = sla.lu_factor(M, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NonUniqueSteadyState(str(exc)) from exc
    if np.min(np.abs(np.diag(lu[0]))) <= 1e-12 * np.max(np.abs(np.diag(lu[0]))):
        raise NonUniqueSteadyState("bordered generator is singular")
    return unvec(sla.lu_solve(lu, rhs))


def _longtime(L, target, max_time):
    d = L.dim
    rho = np.eye(d, dtype=complex) / d
    frame = _choose_frame(L, "auto")
    rate = L.norm_estimate(include_hamiltonian=False)
    chunk = 1.0 / max(rate, 1e-12) * 10
    max_time = 1e4 * chunk if max_time is None else max_time
    t, last = 0.0, np.inf
    while t < max_time:
        rho = propagate(L, rho, chunk, frame=frame)
        t += chunk
        res = residual(L, rho)
        if res < target:
            return _normalize_state(rho)
        if res > 0.999 * last:
            raise NoConvergence(f"residual stalled at {res:.3g}")
        last = res
    raise NoConvergence(f"no convergence within t={max_time}")


def solve_traceless(L, source):
    """X with L X = source and Tr X = 0; source must be traceless.

    Used for the stationary first-order state (L0 X = -L1 pi0).
    """
    d = L.dim
    source = np.asarray(source, dtype=complex)
    pi = steady_state(L)
    if L.is_secular:
        fr = L.frame
        s_eb = fr.to_eb(source)
        Y = np.zeros((d, d), dtype=complex)
        for mm, nn, nu in fr.sectors():
            M = fr.block(mm, nn, nu)
            b = s_eb[mm, nn]
            if abs(nu) <= 10 * fr.tol:
                x = np.linalg.lstsq(M, b, rcond=None)[0]
            else:
                x = np.linalg.solve(M, b)
            Y[mm, nn] = x
        X = fr.from_eb(Y)
    elif d * d <= 4096:
        X = unvec(np.linalg.lstsq(L.dense(), vec(source), rcond=None)[0])
    else:
        raise ValueError("generator too large for a dense solve")
    return X - np.trace(X) * pi
