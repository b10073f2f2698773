"""Fundamental matrix that removes the in-domain coupling.

``P' = lambda0^{-1} M P``, ``P(0) = I``.  With ``z = P^{-1} z~`` the coupled
system becomes pure transport and ``M`` only survives through ``P(1)`` in the
boundary condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import GeometryTables
from .quadrature import cumulative_simpson
from .systems import DimensionMismatch, HypspecError, ValidatedSystem

__all__ = [
    "IntegratorFailure",
    "SimilaritySolution",
    "solve_P",
    "transform_state",
    "inverse_transform",
]


class IntegratorFailure(HypspecError):
    pass


@dataclass(frozen=True, eq=False)
class SimilaritySolution:
    grid: np.ndarray
    P_values: np.ndarray
    Pinv_values: np.ndarray
    logdet_check: float
    inverse_defect: float

    @property
    def P1(self) -> np.ndarray:
        return self.P_values[-1]

    @property
    def n(self) -> int:
        return self.P_values.shape[-1]


def solve_P(
    system: ValidatedSystem,
    geometry: GeometryTables,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> SimilaritySolution:
    """Integrate ``P`` and ``P^{-1}`` as two independent ODEs.

    ``P^{-1}`` solves ``(P^{-1})' = -lambda0^{-1} P^{-1} M`` and is never
    obtained by inverting ``P``; the product defect ``max ||P P^{-1} - I||_F``
    and the Liouville deviation are stored as accuracy certificates.
    """
    if not 1e-14 <= rtol <= 1e-4:
        raise ValueError("rtol must lie in [1e-14, 1e-4]")
    n = system.n
    grid = geometry.grid
    eye = np.eye(n, dtype=complex)

    if system.M.kind == "constant" and not np.any(system.M.values):
        P = np.broadcast_to(eye, (grid.size, n, n)).copy()
        return SimilaritySolution(grid, P, P.copy(), 0.0, 0.0)

    lam = system.lambda0
    M = system.M

    def rhs(zeta, y):
        a = M(zeta) / lam(zeta)
        P = y[: n * n].reshape(n, n)
        Q = y[n * n:].reshape(n, n)
        return np.concatenate(((a @ P).ravel(), (-(Q @ a)).ravel()))

    y0 = np.concatenate((eye.ravel(), eye.ravel()))
    # kinks of M or lambda0 spoil the step control; restart at each one
    pts = {0.0, 1.0, *M.breaks}
    if M.kind == "sampled-grid":
        pts.update(M.nodes.tolist())
    if lam.kind == "sampled-grid":
        pts.update(lam.params[0].tolist())
    breaks = np.array(sorted(pts))
    Y = np.empty((grid.size, 2 * n * n), dtype=complex)
    Y[0] = y0
    for a, b in zip(breaks[:-1], breaks[1:]):
        sol = solve_ivp(rhs, (a, b), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
        if sol.status != 0:
            raise IntegratorFailure(f"P integration failed on [{a:g}, {b:g}]: {sol.message}")
        sel = (grid > a) & (grid <= b)
        Y[sel] = sol.sol(grid[sel]).T
        y0 = sol.y[:, -1]
        Y[grid == b] = y0
    P = Y[:, : n * n].reshape(-1, n, n)
    Pinv = Y[:, n * n:].reshape(-1, n, n)
    P[0] = eye
    Pinv[0] = eye

    defect = float(np.max(np.linalg.norm(P @ Pinv - eye, axis=(1, 2))))
    trace = np.trace(M(grid), axis1=-2, axis2=-1) / geometry.lambda_values
    liouville = np.exp(cumulative_simpson(trace, geometry.h))
    logdet = float(np.max(np.abs(np.linalg.det(P) - liouville) / np.abs(liouville)))
    P.flags.writeable = False
    Pinv.flags.writeable = False
    return SimilaritySolution(grid, P, Pinv, logdet, defect)


def _check_field(sim: SimilaritySolution, f) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (sim.grid.size, sim.n):
        raise DimensionMismatch(f"field has shape {f.shape}, expected {(sim.grid.size, sim.n)}")
    return f


def transform_state(sim: SimilaritySolution, ztilde) -> np.ndarray:
    """``z(zeta) = P(zeta)^{-1} z~(zeta)`` at every master node."""
    ztilde = _check_field(sim, ztilde)
    return np.einsum("kij,kj->ki", sim.Pinv_values, ztilde)


def inverse_transform(sim: SimilaritySolution, z) -> np.ndarray:
    """``z~(zeta) = P(zeta) z(zeta)`` at every master node."""
    z = _check_field(sim, z)
    return np.einsum("kij,kj->ki", sim.P_values, z)
