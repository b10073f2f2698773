"""Eigenfunctions, Jordan-chain eigenfunctions and the weighted inner product.

For an eigenvector ``v`` of ``A_d`` with eigenvalue ``rho`` the transport
operator has the eigenfunctions

    phi_kl(zeta) = lambda0(0)/lambda0(zeta) exp(-mu_kl eta(zeta)) v.

A Jordan chain of ``A_d`` of length ``p`` lifts to ``p`` generalized
eigenfunctions built from vectors ``omega_1..omega_p`` and the nested
integrals ``Omega_m``.  In the diagonalizable case the family is orthonormal
for the inner product weighted by ``lambda0 W`` (see :func:`build_weight`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import GeometryTables
from .quadrature import derivative, simpson
from .spectrum import BoundaryEigenStructure, ModeIndex, mode_eigenvalue
from .systems import DimensionMismatch, HypspecError

__all__ = [
    "NoEigenvector",
    "DefectiveChain",
    "IndexOutOfChain",
    "NotDiagonalizable",
    "ModeFunction",
    "WeightMatrix",
    "ModalCoefficients",
    "eigenfunction",
    "jordan_omegas",
    "generalized_eigenfunction",
    "apply_shifted_operator",
    "chain_residuals",
    "build_weight",
    "weighted_inner_product",
    "project_initial_state",
    "mode_table",
]

FD_ORDER = 8


class NoEigenvector(HypspecError):
    pass


class DefectiveChain(HypspecError):
    pass


class IndexOutOfChain(HypspecError):
    pass


class NotDiagonalizable(HypspecError):
    pass


@dataclass(frozen=True, eq=False)
class ModeFunction:
    """A (generalized) eigenfunction ``phi_klj``.

    ``omegas`` holds ``omega_1..omega_j`` as rows.  Call the object on any
    ``zeta`` in [0, 1]; :meth:`values` returns the master-grid samples built
    directly from the quadrature tables.
    """

    mode: ModeIndex
    mu: complex
    omegas: np.ndarray
    geometry: GeometryTables

    @property
    def order(self) -> int:
        return self.omegas.shape[0]

    def _bracket(self, omega_of):
        j = self.order
        vec = self.omegas[j - 1][None, :] + 0j
        for m in range(j - 1):
            vec = vec + self.omegas[j - 2 - m][None, :] * omega_of(m + 1)[:, None]
        return vec

    def values(self) -> np.ndarray:
        g = self.geometry
        lam0 = g.lambda_values[0]
        scal = lam0 / g.lambda_values * np.exp(-self.mu * g.eta_values)
        vec = self._bracket(g.omega_values) if self.order > 1 else self.omegas[0][None, :]
        return scal[:, None] * vec

    def __call__(self, zeta) -> np.ndarray:
        g = self.geometry
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        lam0 = g.lambda_values[0]
        scal = lam0 / g.lambda0(zeta) * np.exp(-self.mu * g.eta(zeta))
        if self.order > 1:
            vec = self._bracket(lambda m: g.omega(m, zeta))
        else:
            vec = self.omegas[0][None, :]
        return scal[:, None] * vec

    def boundary_residual(self, A_d) -> float:
        """``|| lambda0(0) phi(0) - A_d lambda0(1) phi(1) ||``; zero on D(A)."""
        g = self.geometry
        vals = self.values()
        r = g.lambda_values[0] * vals[0] - np.asarray(A_d) @ (g.lambda_values[-1] * vals[-1])
        return float(np.linalg.norm(r))


def eigenfunction(
    k: int,
    l: int,
    es: BoundaryEigenStructure,
    geom: GeometryTables,
    chain: int = 0,
) -> ModeFunction:
    """Eigenfunction for ``mu_kl`` using the eigenvector of chain ``chain`` of ``rho_k``."""
    ev = es.eigenvalues[k - 1]
    if not ev.chains or chain >= len(ev.chains):
        raise NoEigenvector(f"rho_{k} has no eigenvector number {chain}")
    mu = mode_eigenvalue(es, geom.eta1, k, l)
    v = ev.chains[chain][-1]
    return ModeFunction(ModeIndex(k, l, 1, chain), mu, v[None, :].copy(), geom)


def jordan_omegas(rho, chain, omega_end, A_d, rank_tol: float = 1e-8) -> np.ndarray:
    """Vectors ``omega_1..omega_p`` for the Jordan chain ``chain``.

    ``chain`` has rows ``v, (rho - A_d) v, ..., (rho - A_d)^{p-1} v`` and
    ``omega_end[q-1] = Omega_q(1)``.  Solves

        (rho - A_d) omega_1 = 0,
        (rho - A_d) omega_m = A_d sum_{q<m} Omega_q(1) omega_{m-q},

    with ``omega_m`` in the span of the last ``m`` chain vectors.  Writing the
    right-hand side as ``sum_r gamma_r b_r`` in the basis
    ``b_r = (rho - A_d)^{p-r} v`` (so ``(rho - A_d) b_{r+1} = b_r``) gives
    ``omega_m = sum_r gamma_r b_{r+1}``.
    """
    chain = np.asarray(chain, dtype=complex)
    A_d = np.asarray(A_d, dtype=complex)
    p = chain.shape[0]
    basis = chain[::-1]  # basis[r-1] = b_r
    omegas = [basis[0]]
    for m in range(2, p + 1):
        rhs = A_d @ sum(omega_end[q - 1] * omegas[m - q - 1] for q in range(1, m))
        sub = basis[: m - 1].T
        gamma, *_ = np.linalg.lstsq(sub, rhs, rcond=None)
        resid = np.linalg.norm(sub @ gamma - rhs)
        if resid > rank_tol * max(1.0, np.linalg.norm(rhs)):
            raise DefectiveChain(f"right-hand side for omega_{m} leaves the chain span (residual {resid:.3g})")
        om = basis[1:m].T @ gamma
        if np.linalg.norm(om) <= rank_tol:
            raise DefectiveChain(f"omega_{m} vanished")
        omegas.append(om)
    return np.array(omegas)


def generalized_eigenfunction(
    k: int,
    l: int,
    j: int,
    omegas,
    es: BoundaryEigenStructure,
    geom: GeometryTables,
    chain: int = 0,
) -> ModeFunction:
    """``phi_klj`` from the first ``j`` rows of ``omegas``; ``j = 1`` is :func:`eigenfunction`."""
    omegas = np.asarray(omegas, dtype=complex)
    if not 1 <= j <= omegas.shape[0]:
        raise IndexOutOfChain(f"j={j} outside the chain of length {omegas.shape[0]}")
    if j - 1 > geom.m_max:
        raise IndexOutOfChain(f"Omega_{j - 1} not tabulated; rebuild geometry with m_max >= {j - 1}")
    mu = mode_eigenvalue(es, geom.eta1, k, l)
    return ModeFunction(ModeIndex(k, l, j, chain), mu, omegas[:j].copy(), geom)


def apply_shifted_operator(values, mu: complex, geom: GeometryTables, order: int = FD_ORDER) -> np.ndarray:
    """``(mu - A) f = mu f + d/dzeta (lambda0 f)`` by finite differences on the master grid."""
    values = np.asarray(values)
    flux = geom.lambda_values[:, None] * values
    return mu * values + derivative(flux, geom.h, order, geom.kinks)


def _grid_norm(values, geom: GeometryTables) -> float:
    return float(np.sqrt(simpson(np.sum(np.abs(values) ** 2, axis=1), geom.h)))


def chain_residuals(mf: ModeFunction, j: int | None = None, order: int = FD_ORDER):
    """Grid L2 norms of ``(mu - A)^j phi`` and ``(mu - A)^{j-1} phi``.

    The first should vanish, the second should not.  ``j`` defaults to the
    order of ``mf``.
    """
    j = mf.order if j is None else j
    f = mf.values()
    prev = f
    for _ in range(j):
        prev = f
        f = apply_shifted_operator(f, mf.mu, mf.geometry, order)
    return _grid_norm(f, mf.geometry), _grid_norm(prev, mf.geometry)


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Node samples of the weight ``W(zeta)`` and of the scalars ``w_k``.

    ``V`` holds the eigenbasis (columns), ``owner[e]`` the 0-based distinct
    eigenvalue of column ``e`` and ``chain[e]`` its chain number.
    """

    W: np.ndarray
    w: np.ndarray
    V: np.ndarray
    Vinv: np.ndarray
    owner: np.ndarray
    chain: np.ndarray


def build_weight(es: BoundaryEigenStructure, geom: GeometryTables) -> WeightMatrix:
    """``W = V^{-*} diag(w_k) V^{-1}`` with
    ``w_k = exp(2 eta log|rho_k| / eta(1)) / (lambda0(0)^2 eta(1))``.
    """
    if not es.diagonalizable:
        raise NotDiagonalizable("A_d has a nontrivial Jordan block")
    V, owner = es.eigenbasis()
    chain = np.array([c for ev in es.eigenvalues for c in range(len(ev.chains))], dtype=int)
    Vinv = np.linalg.inv(V)
    eta1 = geom.eta1
    logs = np.log(np.abs(es.rho[owner]))
    lam0 = geom.lambda_values[0]
    w = np.exp(2.0 * np.outer(geom.eta_values, logs) / eta1) / (lam0**2 * eta1)
    W = np.einsum("ae,ke,eb->kab", Vinv.conj().T, w, Vinv)
    return WeightMatrix(W, w, V, Vinv, owner, chain)


def weighted_inner_product(f, g, W: WeightMatrix, geom: GeometryTables) -> complex:
    """Simpson approximation of ``int g^* lambda0 W f dzeta``."""
    f = np.asarray(f)
    g = np.asarray(g)
    shape = (geom.grid.size, W.V.shape[0])
    if f.shape != shape or g.shape != shape:
        raise DimensionMismatch(f"fields must have shape {shape}")
    integrand = geom.lambda_values * np.einsum("ka,kab,kb->k", g.conj(), W.W, f)
    return complex(simpson(integrand, geom.h))


@dataclass(frozen=True, eq=False)
class ModalCoefficients:
    """``c[e, l + l_max]`` for eigenbasis column ``e`` and lattice index ``l``."""

    c: np.ndarray
    mu: np.ndarray
    l_max: int
    weight: WeightMatrix

    def index(self, e: int) -> tuple:
        """``(k, chain)`` (``k`` 1-based) of eigenbasis column ``e``."""
        return int(self.weight.owner[e]) + 1, int(self.weight.chain[e])

    def coefficient(self, k: int, l: int, chain: int = 0) -> complex:
        e = np.nonzero((self.weight.owner == k - 1) & (self.weight.chain == chain))[0][0]
        return complex(self.c[e, l + self.l_max])


def mode_table(es: BoundaryEigenStructure, W: WeightMatrix, eta1: float, l_max: int) -> np.ndarray:
    """``mu[e, l + l_max]`` for every eigenbasis column."""
    ls = np.arange(-l_max, l_max + 1)
    mu = np.empty((W.V.shape[1], ls.size), dtype=complex)
    for e, k0 in enumerate(W.owner):
        mu[e] = [mode_eigenvalue(es, eta1, k0 + 1, l) for l in ls]
    return mu


def project_initial_state(z0, es: BoundaryEigenStructure, W: WeightMatrix, geom: GeometryTables, l_max: int) -> ModalCoefficients:
    """``c_kl = <z0, phi_kl>_W`` for all eigenvectors and ``|l| <= l_max``."""
    if not es.diagonalizable:
        raise NotDiagonalizable("projection needs a basis of eigenvectors")
    z0 = np.asarray(z0)
    n = W.V.shape[0]
    if z0.shape != (geom.grid.size, n):
        raise DimensionMismatch(f"initial state must have shape {(geom.grid.size, n)}")
    mu = mode_table(es, W, geom.eta1, l_max)
    lam0 = geom.lambda_values[0]
    # v_e^* W z0 at each node
    a = np.einsum("ae,kab,kb->ke", W.V.conj(), W.W, z0)
    c = np.empty(mu.shape, dtype=complex)
    for e in range(n):
        phase = np.exp(-np.outer(mu[e].conj(), geom.eta_values))
        c[e] = lam0 * simpson(phase * a[:, e][None, :], geom.h, axis=1)
    return ModalCoefficients(c, mu, l_max, W)
