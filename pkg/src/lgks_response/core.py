"""Dense operator algebra on a fixed finite basis.

Operators are plain complex numpy arrays of shape (d, d). Superoperators
use column stacking: vec(A X B) = (B^T kron A) vec(X).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import (DecompositionFailure, DimensionMismatch,
                     NonHermitianInput, NonlinearAction)

HERMITIAN_TOL = 1e-12


def dag(A):
    return np.conj(A).T


def as_operator(A, hermitian=False, name="operator"):
    """Return A as a finite square complex array, optionally checking A = A^dagger."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    if hermitian and not is_hermitian(A):
        raise NonHermitianInput(f"{name} is not Hermitian")
    return A


def is_hermitian(A, tol=HERMITIAN_TOL):
    scale = np.max(np.abs(A)) if A.size else 0.0
    return np.max(np.abs(A - dag(A))) <= tol * max(scale, 1e-300)


def check_same_dim(*ops):
    dims = {np.shape(op) for op in ops}
    if len(dims) != 1:
        raise DimensionMismatch(f"operator shapes differ: {sorted(dims)}")


def commutator(A, B):
    return A @ B - B @ A


def anticommutator(A, B):
    return A @ B + B @ A


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Spectrum of a Hermitian operator with its degeneracy groups.

    values are ascending, vectors hold eigenvectors as columns and groups
    is a tuple of index tuples, one per degenerate level.
    """
    values: np.ndarray
    vectors: np.ndarray
    groups: tuple
    degeneracy_tol: float

    @property
    def dim(self):
        return len(self.values)

    def group_energy(self, k):
        return float(np.mean(self.values[list(self.groups[k])]))

    def projector(self, k):
        U = self.vectors[:, list(self.groups[k])]
        return U @ dag(U)

    def to_eigenbasis(self, A):
        return dag(self.vectors) @ A @ self.vectors

    def from_eigenbasis(self, A):
        return self.vectors @ A @ dag(self.vectors)


def group_levels(values, tol):
    """Single-linkage grouping of sorted levels closer than tol."""
    groups, current = [], [0]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= tol:
            current.append(i)
        else:
            groups.append(tuple(current))
            current = [i]
    groups.append(tuple(current))
    return tuple(groups)


def eigendecompose_hermitian(H, degeneracy_tol=None):
    """Eigenvalues, eigenvectors and degeneracy groups of a Hermitian matrix.

    degeneracy_tol defaults to 1e-9 of the spectral span.
    """
    H = as_operator(H, hermitian=True, name="H")
    H = 0.5 * (H + dag(H))
    try:
        E, U = sla.eigh(H)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DecompositionFailure(str(exc)) from exc
    if degeneracy_tol is None:
        degeneracy_tol = 1e-9 * (E[-1] - E[0])
    groups = group_levels(E, degeneracy_tol)
    return EigenSystem(E, U, groups, float(degeneracy_tol))


def expectation(rho, A):
    """Tr(rho A)."""
    rho = np.asarray(rho)
    A = np.asarray(A)
    if rho.shape != A.shape:
        raise DimensionMismatch(f"state {rho.shape} vs operator {A.shape}")
    return complex(np.einsum("ij,ji->", rho, A))


def validate_density(rho, tol=1e-10, name="rho"):
    rho = as_operator(rho, name=name)
    if np.max(np.abs(rho - dag(rho))) > tol:
        raise NonHermitianInput(f"{name} is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"{name} does not have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + dag(rho)))[0] < -1e-8:
        raise ValueError(f"{name} is not positive semidefinite")
    return rho


def vec(X):
    return np.asarray(X).reshape(-1, order="F")


def unvec(v, d=None):
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    return v.reshape((d, d), order="F")


def vectorize_superoperator(action, dim, check=True, rng=None):
    """Dense d^2 x d^2 matrix M with M vec(X) = vec(action(X))."""
    d = int(dim)
    rng = np.random.default_rng(12345) if rng is None else rng
    if check:
        for _ in range(3):
            X, Y = random_matrix(d, rng), random_matrix(d, rng)
            a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
            lhs = action(a * X + b * Y)
            rhs = a * action(X) + b * action(Y)
            scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1.0)
            if np.max(np.abs(lhs - rhs)) > 1e-10 * scale:
                raise NonlinearAction("action fails the linearity check")
    M = np.empty((d * d, d * d), dtype=complex)
    E = np.zeros((d, d), dtype=complex)
    for k in range(d * d):
        i, j = k % d, k // d
        E[i, j] = 1.0
        M[:, k] = vec(action(E))
        E[i, j] = 0.0
    return M


def random_matrix(d, rng):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_hermitian(d, rng):
    X = random_matrix(d, rng)
    return 0.5 * (X + dag(X))


def random_density(d, rng, rank=None):
    """Random density matrix from a Ginibre ensemble."""
    rank = d if rank is None else rank
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = X @ dag(X)
    return rho / np.trace(rho).real


def hermitian_function(A, f):
    """f(A) for Hermitian A via its eigendecomposition."""
    E, U = np.linalg.eigh(0.5 * (A + dag(A)))
    return (U * f(E)) @ dag(U)


def gibbs_state(H, T):
    """exp(-H/T)/Z, or the ground-state projector (averaged over degeneracy) at T = 0."""
    E, U = np.linalg.eigh(0.5 * (H + dag(H)))
    if T == 0:
        w = (np.abs(E - E[0]) <= 1e-9 * max(1.0, abs(E[0]))).astype(float)
    else:
        w = np.exp(-(E - E[0]) / T)
    w /= w.sum()
    return (U * w) @ dag(U)


def gibbs_log(H, T):
    """ln of the Gibbs state of H at T > 0, computed without under/overflow."""
    E, U = np.linalg.eigh(0.5 * (H + dag(H)))
    x = -(E - E[0]) / T
    logw = x - np.log(np.sum(np.exp(x)))
    return (U * logw) @ dag(U)


def format_operator(A):
    """Plain-text form: first line dim, then `row col re im` per entry."""
    A = np.asarray(A, dtype=complex)
    d = A.shape[0]
    lines = [str(d)]
    for i in range(d):
        for j in range(d):
            lines.append(f"{i} {j} {A[i, j].real:.17g} {A[i, j].imag:.17g}")
    return "\n".join(lines) + "\n"


def parse_operator(text):
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 1:
        raise ValueError("first line must hold the dimension")
    d = int(rows[0][0])
    if len(rows) - 1 != d * d:
        raise DimensionMismatch(f"expected {d * d} entries, found {len(rows) - 1}")
    A = np.zeros((d, d), dtype=complex)
    for r in rows[1:]:
        i, j = int(r[0]), int(r[1])
        A[i, j] = float(r[2]) + 1j * float(r[3])
    return as_operator(A)


def save_operator(path, A):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_operator(A))


def load_operator(path):
    with open(path) as fh:
        return parse_operator(fh.read())
