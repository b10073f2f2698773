"""Boundary matrix, its Jordan structure, and the eigenvalue lattice.

Everything about the spectrum of the transport operator is read off the
finite matrix ``A_d = -K^{-1} L P(1)``: each eigenvalue ``rho_k`` of ``A_d``
spawns the vertical lattice

    mu_kl = (log|rho_k| + i (theta_k + 2 pi l)) / eta(1),   l in Z,

with ``theta_k`` in ``[0, 2 pi)``.  The growth bound is the common real part
of the rightmost column and stability means every ``rho_k`` is strictly
inside the unit disc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .systems import HypspecError, Regime, SpectralClassification, ValidatedSystem

__all__ = [
    "DEFAULT_RANK_TOL",
    "SingularK",
    "EigDecompFailure",
    "ZeroEigenvalue",
    "Eigenvalue",
    "BoundaryEigenStructure",
    "ModeIndex",
    "SpectrumResult",
    "boundary_matrix",
    "eigen_structure",
    "mode_eigenvalue",
    "growth_bound",
    "stability_verdict",
    "analyze",
    "enumerate_modes",
]

DEFAULT_RANK_TOL = 1e-8
TWO_PI = 2.0 * math.pi


class SingularK(HypspecError):
    pass


class EigDecompFailure(HypspecError):
    pass


class ZeroEigenvalue(HypspecError):
    pass


def boundary_matrix(system: ValidatedSystem, P1, classification: SpectralClassification | None = None) -> np.ndarray:
    """``A_d = -K^{-1} L P(1)`` through a linear solve against ``K``."""
    if classification is not None and classification.tag is Regime.NOT_WELL_POSED:
        raise SingularK("K is singular: the system is not well posed")
    try:
        lu = scipy.linalg.lu_factor(system.K, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularK(str(exc)) from exc
    if np.any(np.diag(lu[0]) == 0):
        raise SingularK("K is exactly singular")
    return -scipy.linalg.lu_solve(lu, system.L @ np.asarray(P1))


@dataclass(frozen=True, eq=False)
class Eigenvalue:
    """One distinct eigenvalue of ``A_d`` with its Jordan chains.

    ``chains[c]`` is an array of shape ``(p, n)`` holding
    ``v, (rho - A_d) v, ..., (rho - A_d)^{p-1} v``; the last row is a true
    eigenvector.
    """

    rho: complex
    algebraic: int
    geometric: int
    chains: tuple

    @property
    def modulus(self) -> float:
        return abs(self.rho)

    @property
    def theta(self) -> float:
        th = math.atan2(self.rho.imag, self.rho.real)
        if th < 0.0:
            th += TWO_PI
        # atan2 can round a tiny negative angle up to exactly 2 pi
        return 0.0 if th >= TWO_PI else th

    @property
    def eigenvectors(self) -> list:
        return [ch[-1] for ch in self.chains]

    @property
    def chain_lengths(self) -> list:
        return [len(ch) for ch in self.chains]


@dataclass(frozen=True, eq=False)
class BoundaryEigenStructure:
    A_d: np.ndarray
    eigenvalues: tuple
    rank_tol: float

    @property
    def n_distinct(self) -> int:
        return len(self.eigenvalues)

    @property
    def diagonalizable(self) -> bool:
        return all(ev.algebraic == ev.geometric for ev in self.eigenvalues)

    @property
    def rho(self) -> np.ndarray:
        return np.array([ev.rho for ev in self.eigenvalues])

    def eigenbasis(self):
        """Eigenvector matrix ``V`` (columns) and the eigenvalue of each column.

        Only meaningful in the diagonalizable case, where the columns form a
        basis of C^n.
        """
        cols, owner = [], []
        for k, ev in enumerate(self.eigenvalues):
            for v in ev.eigenvectors:
                cols.append(v)
                owner.append(k)
        return np.array(cols).T, np.array(owner, dtype=int)


def _normalize(v: np.ndarray, tol: float) -> np.ndarray:
    v = v / np.linalg.norm(v)
    big = np.nonzero(np.abs(v) > tol)[0]
    pivot = big[0] if big.size else int(np.argmax(np.abs(v)))
    return v * (abs(v[pivot]) / v[pivot])


def _null_basis(mat: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal null-space basis (columns); singular values below ``tol`` count as zero."""
    _, s, vh = np.linalg.svd(mat)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def _cluster(values: np.ndarray, tol: float) -> list:
    """Single-linkage clusters of eigenvalues closer than ``tol * max(1, |rho|)``."""
    n = values.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol * max(1.0, abs(values[i]), abs(values[j])):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _jordan_chains(B: np.ndarray, alg: int, tol: float):
    """Jordan chains of the nilpotent part of ``B = rho - A_d``.

    Uses the nullities ``d_j = dim ker B^j``: the number of chains of length
    exactly ``j`` is ``2 d_j - d_{j-1} - d_{j+1}``.  Chain heads are picked
    from ``ker B^j`` outside ``ker B^{j-1}`` plus the images of longer chains.
    """
    n = B.shape[0]
    scale = max(1.0, np.linalg.norm(B, 2))
    kernels = [np.zeros((n, 0), dtype=complex)]
    power = np.eye(n, dtype=complex)
    for j in range(1, alg + 1):
        power = B @ power
        kernels.append(_null_basis(power, tol * scale**j))
        if kernels[-1].shape[1] >= alg:
            break
    dims = [k.shape[1] for k in kernels]
    pmax = len(dims) - 1
    dims_ext = dims + [dims[-1]]
    heads = []  # (length, head vector)
    for j in range(pmax, 0, -1):
        count = 2 * dims_ext[j] - dims_ext[j - 1] - dims_ext[j + 1]
        if count <= 0:
            continue
        span = [kernels[j - 1]]
        for length, v in heads:
            span.append(np.linalg.matrix_power(B, length - j) @ v[:, None])
        S = np.hstack(span)
        if S.shape[1]:
            q, r = np.linalg.qr(S)
            keep = np.abs(np.diag(r)) > tol * max(1.0, np.max(np.abs(r)))
            q = q[:, keep]
        else:
            q = np.zeros((n, 0), dtype=complex)
        resid = kernels[j] - q @ (q.conj().T @ kernels[j])
        _, s, vh = np.linalg.svd(resid)
        for c in range(min(count, vh.shape[0])):
            heads.append((j, kernels[j] @ vh[c].conj()))
    chains = []
    for length, v in heads:
        v = _normalize(v, tol)
        rows = [v]
        for _ in range(length - 1):
            rows.append(B @ rows[-1])
        chains.append(np.array(rows))
    return chains, dims[1]


def eigen_structure(A_d, rank_tol: float = DEFAULT_RANK_TOL) -> BoundaryEigenStructure:
    """Eigenvalues of ``A_d`` with multiplicities and Jordan chains.

    Eigenvalues are clustered with relative tolerance ``rank_tol``; the cluster
    mean is used as the representative.  Distinct eigenvalues are ordered by
    decreasing modulus, then increasing argument in ``[0, 2 pi)``.
    """
    if not rank_tol > 0:
        raise ValueError("rank_tol must be positive")
    A_d = np.asarray(A_d, dtype=complex)
    n = A_d.shape[0]
    try:
        vals = scipy.linalg.eigvals(A_d)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigDecompFailure(str(exc)) from exc
    if not np.all(np.isfinite(vals)):
        raise EigDecompFailure("non-finite eigenvalues")
    out = []
    for group in _cluster(vals, rank_tol):
        rho = complex(np.mean(vals[group]))
        # snap to the real axis when the imaginary part is pure rounding
        if abs(rho.imag) <= 1e-14 * max(1.0, abs(rho)):
            rho = complex(rho.real, 0.0)
        alg = len(group)
        B = rho * np.eye(n) - A_d
        chains, geom = _jordan_chains(B, alg, rank_tol)
        if not chains:
            raise EigDecompFailure(f"no eigenvector found for rho={rho}")
        out.append(Eigenvalue(rho, alg, geom, tuple(chains)))
    out.sort(key=lambda ev: (-round(ev.modulus, 12), round(ev.theta, 12)))
    if sum(ev.algebraic for ev in out) != n:
        raise EigDecompFailure("algebraic multiplicities do not add up to n")
    A_d = A_d.copy()
    A_d.flags.writeable = False
    return BoundaryEigenStructure(A_d, tuple(out), rank_tol)


def mode_eigenvalue(es: BoundaryEigenStructure, eta1: float, k: int, l: int) -> complex:
    """``mu_kl`` for the 1-based distinct-eigenvalue index ``k``."""
    ev = es.eigenvalues[k - 1]
    if ev.modulus == 0.0:
        raise ZeroEigenvalue(f"rho_{k} = 0 has no logarithm")
    return complex(math.log(ev.modulus), ev.theta + TWO_PI * l) / eta1


def growth_bound(es: BoundaryEigenStructure, eta1: float) -> float:
    """``max_k log|rho_k| / eta(1)``, the supremum of ``Re mu_kl``."""
    mods = [ev.modulus for ev in es.eigenvalues]
    if min(mods) == 0.0:
        return -math.inf if max(mods) == 0.0 else math.log(max(mods)) / eta1
    return max(math.log(m) for m in mods) / eta1


def stability_verdict(es: BoundaryEigenStructure) -> bool:
    """Exponential stability: every ``|rho_k| < 1`` (boundary counts as unstable)."""
    return max(ev.modulus for ev in es.eigenvalues) < 1.0


@dataclass(frozen=True)
class ModeIndex:
    k: int
    l: int
    j: int = 1
    chain: int = 0


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenstructure: BoundaryEigenStructure
    eta1: float
    growth_bound: float
    stable: bool
    classification: SpectralClassification | None = field(default=None)

    def lattice(self, k: int, l: int) -> complex:
        return mode_eigenvalue(self.eigenstructure, self.eta1, k, l)


def analyze(
    system: ValidatedSystem,
    P1,
    eta1: float,
    classification: SpectralClassification | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> SpectrumResult:
    """Boundary matrix, eigenstructure, growth bound and verdict in one go."""
    es = eigen_structure(boundary_matrix(system, P1, classification), rank_tol)
    return SpectrumResult(es, eta1, growth_bound(es, eta1), stability_verdict(es), classification)


def enumerate_modes(result: SpectrumResult, l_max: int) -> list:
    """All ``(ModeIndex, mu)`` with ``|l| <= l_max``.

    Sorted by decreasing real part, then increasing ``|Im mu|``; ties are
    broken by ``(k, l)``.
    """
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    items = []
    for k in range(1, result.eigenstructure.n_distinct + 1):
        for l in range(-l_max, l_max + 1):
            items.append((ModeIndex(k, l), result.lattice(k, l)))
    items.sort(key=lambda it: (-it[1].real, abs(it[1].imag), it[0].k, it[0].l))
    return items
