"""Time evolution of the transport system, by characteristics and by modes.

In the variable ``w = lambda0 z`` and the travel-time coordinate ``eta`` the
transformed system is pure unit-speed transport, ``w_t + w_eta = 0``, fed at
the inflow by ``w(0, t) = A_d w(eta(1), t)``.  Following a characteristic
back to ``t = 0`` gives the exact solution

    w(eta, t) = A_d^m w0(eta - t + m eta(1)),   m = max(0, ceil((t - eta)/eta(1))),

used here as the reference.  Where ``(t - eta)/eta(1)`` is an integer the
two neighbouring choices of ``m`` differ only if ``z0`` violates the boundary
condition; endpoint nodes then take the limit from the interior.  The modal route sums ``c_kl exp(mu_kl t) phi_kl``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .eigenfunctions import ModalCoefficients, NotDiagonalizable, build_weight, project_initial_state
from .geometry import GeometryTables
from .quadrature import simpson
from .similarity import SimilaritySolution, inverse_transform, transform_state
from .spectrum import BoundaryEigenStructure
from .systems import DimensionMismatch, HypspecError

__all__ = [
    "NegativeTime",
    "SimulationResult",
    "CharacteristicsOracle",
    "characteristics_oracle",
    "modal_simulate",
    "simulate",
    "simulate_original",
    "state_norm",
    "compare_methods",
    "smooth_initial_state",
]


class NegativeTime(HypspecError):
    pass


@dataclass(frozen=True, eq=False)
class SimulationResult:
    times: np.ndarray
    grid: np.ndarray
    states: np.ndarray  # (len(times), N + 1, n)
    method: str


class CharacteristicsOracle:
    """Exact transport solution for one initial state.

    ``w0 = lambda0 z0`` is interpolated in ``eta`` by a cubic spline; every
    requested time then costs one spline evaluation and a few matrix powers.
    Initial data need not satisfy the boundary condition: the mismatch simply
    travels along the characteristics (with first-order interpolation error
    near the resulting jump).
    """

    def __init__(self, A_d, geom: GeometryTables, z0):
        z0 = np.asarray(z0)
        if z0.ndim != 2 or z0.shape[0] != geom.grid.size:
            raise DimensionMismatch(f"initial state must have {geom.grid.size} rows")
        self.A_d = np.asarray(A_d, dtype=complex)
        if self.A_d.shape != (z0.shape[1], z0.shape[1]):
            raise DimensionMismatch("A_d does not match the number of components")
        self.geom = geom
        self.z0 = z0.astype(complex)
        w0 = geom.lambda_values[:, None] * self.z0
        self._w0 = CubicSpline(geom.eta_values, w0, axis=0)

    def __call__(self, t: float) -> np.ndarray:
        if t < 0:
            raise NegativeTime(f"t={t} < 0")
        if t == 0:
            return self.z0.copy()
        g = self.geom
        eta, eta1 = g.eta_values, g.eta1
        # feet of characteristics in (0, eta(1)], except at the inflow node
        # where the foot is taken in [0, eta(1)); both endpoints then carry
        # the limit from the interior when z0 violates the boundary condition
        m = np.floor((t - eta) / eta1) + 1
        m[0] = math.ceil(t / eta1)
        m = np.maximum(0, m).astype(int)
        arg = np.clip(eta - t + m * eta1, 0.0, eta1)
        w = self._w0(arg)
        out = np.empty_like(w)
        power = np.eye(self.A_d.shape[0], dtype=complex)
        for mm in range(int(m.max()) + 1):
            sel = m == mm
            if np.any(sel):
                out[sel] = w[sel] @ power.T
            power = self.A_d @ power
        return out / g.lambda_values[:, None]


def characteristics_oracle(A_d, geom: GeometryTables, z0, t) -> np.ndarray:
    """State of the transformed system at time ``t`` (scalar) or times ``t`` (sequence)."""
    oracle = CharacteristicsOracle(A_d, geom, z0)
    if np.ndim(t) == 0:
        return oracle(float(t))
    return np.array([oracle(float(tt)) for tt in t])


def modal_simulate(coeffs: ModalCoefficients, geom: GeometryTables, t) -> np.ndarray:
    """``sum_{k, |l| <= l_max} c_kl exp(mu_kl t) phi_kl`` on the master grid."""
    if np.ndim(t) != 0:
        return np.array([modal_simulate(coeffs, geom, tt) for tt in t])
    if t < 0:
        raise NegativeTime(f"t={t} < 0")
    V = coeffs.weight.V
    lam0 = geom.lambda_values[0]
    # exp(mu (t - eta)) per column e, lattice l, node
    out = np.zeros((geom.grid.size, V.shape[0]), dtype=complex)
    for e in range(V.shape[1]):
        phase = np.exp(np.outer(geom.eta_values, -coeffs.mu[e]) + coeffs.mu[e] * t)
        out += np.outer(phase @ coeffs.c[e], V[:, e])
    return lam0 / geom.lambda_values[:, None] * out


def simulate(
    es: BoundaryEigenStructure,
    geom: GeometryTables,
    z0,
    times,
    method: str = "oracle",
    l_max: int = 64,
) -> SimulationResult:
    """Evolve the transformed state ``z0`` to each of ``times``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise NegativeTime("times must be nonnegative")
    if method == "oracle":
        oracle = CharacteristicsOracle(es.A_d, geom, z0)
        states = np.array([oracle(t) for t in times])
        label = "oracle"
    elif method == "modal":
        W = build_weight(es, geom)
        coeffs = project_initial_state(z0, es, W, geom, l_max)
        states = np.array([modal_simulate(coeffs, geom, t) for t in times])
        label = f"modal({l_max})"
    else:
        raise ValueError(f"unknown method {method!r}")
    return SimulationResult(times, geom.grid, states, label)


def simulate_original(
    sim: SimilaritySolution,
    es: BoundaryEigenStructure,
    geom: GeometryTables,
    ztilde0,
    times,
    method: str = "oracle",
    l_max: int = 64,
) -> SimulationResult:
    """Evolve the original state: map through ``P^{-1}``, evolve, map back through ``P``."""
    z0 = transform_state(sim, ztilde0)
    res = simulate(es, geom, z0, times, method, l_max)
    back = np.array([inverse_transform(sim, s) for s in res.states])
    return SimulationResult(res.times, res.grid, back, res.method)


def state_norm(z, geom: GeometryTables) -> float:
    """State-space norm ``sqrt(int lambda0 |z|^2)``."""
    z = np.asarray(z)
    return math.sqrt(simpson(geom.lambda_values * np.sum(np.abs(z) ** 2, axis=1), geom.h))


def compare_methods(reference, other, geom: GeometryTables):
    """Absolute and relative state-space distance between two states.

    The relative error is taken with respect to ``reference`` (normally the
    oracle state); it is ``inf`` if the reference is zero and the states differ.
    """
    a, b = other, reference
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    err = state_norm(a - b, geom)
    ref = state_norm(b, geom)
    if ref == 0.0:
        return err, (0.0 if err == 0.0 else math.inf)
    return err, err / ref


def smooth_initial_state(es: BoundaryEigenStructure, geom: GeometryTables, rng=None, ratio: float = 0.7) -> np.ndarray:
    """Random smooth state compatible with the boundary coupling to all orders.

    Along each eigenvector ``v_e`` the profile is the ``l = 0`` eigenfunction
    times ``1/(a - cos(2 pi s + phase))`` in ``s = eta/eta(1)``, a periodic
    function whose Fourier coefficients decay like ``ratio**|l|``.  Needs a
    diagonalizable ``A_d``.
    """
    rng = np.random.default_rng(rng)
    if not es.diagonalizable:
        raise NotDiagonalizable("smooth compatible data are built from an eigenbasis")
    V, owner = es.eigenbasis()
    a = 0.5 * (ratio + 1.0 / ratio)
    s = geom.eta_values / geom.eta1
    lam0 = geom.lambda_values[0]
    out = np.zeros((geom.grid.size, V.shape[0]), dtype=complex)
    for e in range(V.shape[1]):
        ev = es.eigenvalues[owner[e]]
        mu0 = complex(math.log(ev.modulus), ev.theta) / geom.eta1
        amp = rng.normal() + 1j * rng.normal()
        prof = amp / (a - np.cos(2.0 * math.pi * s + rng.uniform(0, 2 * math.pi)))
        out += np.outer(lam0 / geom.lambda_values * np.exp(-mu0 * geom.eta_values) * prof, V[:, e])
    return out
