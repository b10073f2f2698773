"""Travel-time coordinate and nested integrals on the master grid.

``eta(zeta) = int_0^zeta lambda0^{-1}`` is the time a characteristic needs to
reach ``zeta``; ``Omega_m`` are the iterated integrals

    Omega_0 = 1,   Omega_m(zeta) = int_0^zeta lambda0^{-1} Omega_{m-1},

which enter the generalized eigenfunctions of defective boundary matrices.
All tables live on one equispaced grid shared with every other module.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .quadrature import cumulative_simpson
from .systems import CoefficientProfile, HypspecError, ValidatedSystem

__all__ = [
    "DEFAULT_GRID_N",
    "OutOfRange",
    "GeometryTables",
    "default_grid_size",
    "build_geometry",
    "eta_inverse",
]

DEFAULT_GRID_N = 2048


class OutOfRange(HypspecError):
    pass


def default_grid_size() -> int:
    """Master grid size, overridable through ``HYPSPEC_GRID_N``."""
    value = os.environ.get("HYPSPEC_GRID_N")
    return int(value) if value else DEFAULT_GRID_N


@dataclass(frozen=True, eq=False)
class GeometryTables:
    grid: np.ndarray
    lambda0: CoefficientProfile
    lambda_values: np.ndarray
    eta_values: np.ndarray
    omega_tables: tuple
    _splines: tuple = field(repr=False)
    kinks: tuple = ()  # grid indices of sampled-speed nodes

    @property
    def N(self) -> int:
        return self.grid.size - 1

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def eta1(self) -> float:
        return float(self.eta_values[-1])

    @property
    def m_max(self) -> int:
        return len(self.omega_tables)

    def omega_values(self, m: int) -> np.ndarray:
        """Node values of ``Omega_m`` (``m = 0`` gives ones)."""
        if m == 0:
            return np.ones_like(self.grid)
        if not 1 <= m <= self.m_max:
            raise IndexError(f"Omega_{m} not tabulated (m_max={self.m_max})")
        return self.omega_tables[m - 1]

    def omega_at_end(self, m: int) -> float:
        return float(self.omega_values(m)[-1])

    def eta(self, zeta):
        return self._splines[0](zeta)

    def omega(self, m: int, zeta):
        if m == 0:
            return np.ones(np.shape(zeta))
        if not 1 <= m <= self.m_max:
            raise IndexError(f"Omega_{m} not tabulated (m_max={self.m_max})")
        return self._splines[m - 1](zeta)


def build_geometry(system: ValidatedSystem, N: int | None = None, m_max: int | None = None) -> GeometryTables:
    """Tabulate eta and Omega_1..Omega_{m_max} on ``N + 1`` equispaced nodes.

    Node values come from cumulative composite Simpson quadrature.  Between
    nodes the tables are evaluated with cubic Hermite interpolation using the
    exact derivatives ``Omega_m' = lambda0^{-1} Omega_{m-1}``.
    """
    N = default_grid_size() if N is None else int(N)
    m_max = system.n if m_max is None else int(m_max)
    if N < 16 or N % 2:
        raise ValueError(f"grid size must be even and >= 16, got {N}")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    grid = np.linspace(0.0, 1.0, N + 1)
    lam = system.lambda0(grid)
    inv = 1.0 / lam
    h = 1.0 / N
    kinks = _kink_indices(system.lambda0, N)
    tables = []
    splines = []
    prev = np.ones_like(grid)
    for _ in range(m_max):
        cur = cumulative_simpson(inv * prev, h, kinks)
        tables.append(cur)
        splines.append(CubicHermiteSpline(grid, cur, inv * prev, extrapolate=False))
        prev = cur
    for t in tables:
        t.flags.writeable = False
    grid.flags.writeable = False
    lam.flags.writeable = False
    return GeometryTables(grid, system.lambda0, lam, tables[0], tuple(tables), tuple(splines), kinks)


def _kink_indices(lam, N: int) -> tuple:
    """Even grid indices holding nodes of a sampled speed, at least 8 intervals apart.

    Quadrature and difference stencils are kept from reaching across them.
    Nodes that miss the grid are left alone.
    """
    if lam.kind != "sampled-grid":
        return ()
    out = []
    for x in lam.params[0][1:-1]:
        i = round(x * N)
        if abs(x * N - i) < 1e-9 and i % 2 == 0 and i - (out[-1] if out else 0) >= 8 and N - i >= 8:
            out.append(i)
    return tuple(out)


def eta_inverse(tables: GeometryTables, s, tol: float = 1e-12):
    """Solve ``eta(zeta) = s`` for ``zeta``.

    Newton's method on the interpolated table, bracketed by the grid cell that
    contains ``s``; iterates leaving the bracket are replaced by bisection.
    Accepts scalars or arrays.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    eta_nodes = tables.eta_values
    eta1 = tables.eta1
    if np.any(s_arr < 0.0) or np.any(s_arr > eta1) or np.any(~np.isfinite(s_arr)):
        raise OutOfRange(f"s must lie in [0, {eta1:.17g}]")
    spline = tables._splines[0]
    dspline = spline.derivative()
    idx = np.clip(np.searchsorted(eta_nodes, s_arr, side="right") - 1, 0, tables.N - 1)
    lo = tables.grid[idx].copy()
    hi = tables.grid[idx + 1].copy()
    # linear initial guess inside the cell
    frac = (s_arr - eta_nodes[idx]) / (eta_nodes[idx + 1] - eta_nodes[idx])
    z = lo + frac * (hi - lo)
    for _ in range(60):
        r = spline(z) - s_arr
        done = np.abs(r) <= tol
        if np.all(done):
            break
        lo = np.where(r < 0, z, lo)
        hi = np.where(r > 0, z, hi)
        step = z - r / dspline(z)
        bad = ~((step > lo) & (step < hi))
        z = np.where(done, z, np.where(bad, 0.5 * (lo + hi), step))
    z = np.where(s_arr == 0.0, 0.0, np.where(s_arr == eta1, 1.0, z))
    return float(z[0]) if np.ndim(s) == 0 else z
