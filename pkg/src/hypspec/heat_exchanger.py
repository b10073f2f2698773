"""Co-current heat exchanger as a built-in model.

Two fluids flow in the same direction with velocity ``v`` and exchange heat
through the coefficients ``alpha1``, ``alpha2``.  The inlet of the internal
tube is fed back as ``T_i(0) = kappa (T_e(1) - T_i(1))`` and the external tube
is closed in a loop, ``T_e(0) = T_e(1)``.  After scaling the state by ``1/v``
the model is a member of the general class with

    lambda0 = v,  M = [[-a1, a1], [a2, -a2]],  K = [[-1, 0], [0, 1]],
    L = [[-kappa, kappa], [0, -1]].

Everything here is computed from closed forms with adaptive quadrature, so it
serves as an independent check on the generic grid-based pipeline.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad

from .geometry import build_geometry
from .similarity import solve_P
from .spectrum import analyze
from .systems import CoefficientProfile, HypspecError, MatrixProfile, SystemSpec, classify, validate_system

__all__ = [
    "HeatExchangerSpec",
    "HXReport",
    "hx_to_system",
    "hx_closed_form_P",
    "hx_boundary_matrix",
    "hx_eigenvalues",
    "hx_kappa_threshold",
    "hx_report",
]

_QUAD = dict(epsabs=1e-14, epsrel=1e-13, limit=200)


def _profile(p) -> CoefficientProfile:
    return p if isinstance(p, CoefficientProfile) else CoefficientProfile.constant(p)


@dataclass(frozen=True, eq=False)
class HeatExchangerSpec:
    alpha1: CoefficientProfile
    alpha2: CoefficientProfile
    v: CoefficientProfile
    kappa: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "v"):
            object.__setattr__(self, name, _profile(getattr(self, name)))
            if not getattr(self, name).lower_bound() > 0:
                raise HypspecError(f"{name} must be positive on [0, 1]")
        if not self.kappa > 0:
            raise HypspecError(f"kappa must be positive, got {self.kappa}")

    def with_kappa(self, kappa: float) -> "HeatExchangerSpec":
        return HeatExchangerSpec(self.alpha1, self.alpha2, self.v, kappa)

    @cached_property
    def end_values(self):
        """``(exp(h(1)), int_0^1 e^h alpha1/v, int_0^1 e^h alpha2/v)``, computed once."""
        return math.exp(self.h(1.0)), self.exchange_integral(1), self.exchange_integral(2)

    @cached_property
    def _scalars(self):
        return self.alpha1.scalar(), self.alpha2.scalar(), self.v.scalar()

    def _rate(self, x: float) -> float:
        a1, a2, v = self._scalars
        return (a1(x) + a2(x)) / v(x)

    def _breaks(self):
        pts = []
        for p in (self.alpha1, self.alpha2, self.v):
            if p.kind == "sampled-grid":
                pts.extend(p.params[0][1:-1])
        return sorted(set(pts)) or None

    def _points(self, a: float, b: float):
        pts = [p for p in (self._breaks() or ()) if a < p < b]
        return pts or None

    def _rate_integral(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        return quad(self._rate, a, b, points=self._points(a, b), **_QUAD)[0]

    def h(self, zeta: float) -> float:
        """``h(zeta) = -int_0^zeta (alpha1 + alpha2)/v``."""
        return -self._rate_integral(0.0, float(zeta))

    def exchange_integral(self, i: int, a: float = 0.0, b: float = 1.0, h_a: float | None = None) -> float:
        """``int_a^b exp(h) alpha_i / v``; ``h_a`` is ``h(a)`` if already known."""
        a1, a2, v = self._scalars
        alpha = a1 if i == 1 else a2
        h_a = self.h(a) if h_a is None else h_a

        def integrand(x):
            return math.exp(h_a - self._rate_integral(a, x)) * alpha(x) / v(x)

        return quad(integrand, a, b, points=self._points(a, b), **_QUAD)[0]


def hx_to_system(hx: HeatExchangerSpec) -> SystemSpec:
    a1, a2 = hx.alpha1, hx.alpha2
    K = np.array([[-1.0, 0.0], [0.0, 1.0]])
    L = np.array([[-hx.kappa, hx.kappa], [0.0, -1.0]])
    if a1.kind == "constant" and a2.kind == "constant":
        c1, c2 = a1.params[0], a2.params[0]
        return SystemSpec.build(hx.v, K, L, MatrixProfile.constant([[-c1, c1], [c2, -c2]]))

    def coupling(zeta):
        A1, A2 = a1(zeta), a2(zeta)
        out = np.empty(np.shape(zeta) + (2, 2))
        out[..., 0, 0], out[..., 0, 1] = -A1, A1
        out[..., 1, 0], out[..., 1, 1] = A2, -A2
        return out

    return SystemSpec.build(hx.v, K, L, MatrixProfile.from_function(coupling, 2, breaks=hx._breaks() or ()))


def hx_closed_form_P(hx: HeatExchangerSpec, zeta) -> np.ndarray:
    """Closed-form fundamental matrix

        P = [[P1, P2 - e^h], [P1 - e^h, P2]],  P_i = 1 - int_0^zeta e^h alpha_i / v.

    Accepts a scalar or an array of ``zeta`` (returns ``(..., 2, 2)``).
    """
    if np.ndim(zeta) == 0 and float(zeta) == 1.0:
        eh, I1, I2 = hx.end_values
        return np.array([[1.0 - I1, 1.0 - I2 - eh], [1.0 - I1 - eh, 1.0 - I2]])
    z = np.atleast_1d(np.asarray(zeta, dtype=float))
    order = np.argsort(z)
    out = np.empty((z.size, 2, 2))
    prev, h_prev, I1, I2 = 0.0, 0.0, 0.0, 0.0
    for idx in order:
        b = float(z[idx])
        if b > prev:
            I1 += hx.exchange_integral(1, prev, b, h_prev)
            I2 += hx.exchange_integral(2, prev, b, h_prev)
            h_prev = h_prev - hx._rate_integral(prev, b)
            prev = b
        eh = math.exp(h_prev)
        P1, P2 = 1.0 - I1, 1.0 - I2
        out[idx] = [[P1, P2 - eh], [P1 - eh, P2]]
    return out[0] if np.ndim(zeta) == 0 else out.reshape(np.shape(zeta) + (2, 2))


def hx_boundary_matrix(hx: HeatExchangerSpec) -> np.ndarray:
    """Closed form of ``-K^{-1} L P(1)``."""
    eh1, I1, I2 = hx.end_values
    k = hx.kappa
    return np.array([[-k * eh1, k * eh1], [1.0 - eh1 - I1, 1.0 - I2]])


def hx_eigenvalues(hx: HeatExchangerSpec):
    """Closed-form eigenvalues ``(lambda1, lambda2)`` with ``lambda1 > 0 > lambda2``."""
    eh1, _, I2 = hx.end_values
    ke = hx.kappa * eh1
    disc = (-1.0 + ke + I2) ** 2 + 4.0 * ke
    root = math.sqrt(disc)
    base = 1.0 - ke - I2
    return 0.5 * (base + root), 0.5 * (base - root)


def hx_kappa_threshold(hx: HeatExchangerSpec) -> float:
    """Largest feedback gain keeping the exchanger exponentially stable.

    ``kappa* = exp(-h(1)) (2 - int_0^1 e^h alpha2 / v) / 2``; stable iff
    ``kappa < kappa*``.  ``kappa`` itself is ignored.
    """
    eh1, _, I2 = hx.end_values
    return 0.5 / eh1 * (2.0 - I2)


@dataclass
class HXReport:
    kappa: float
    classification: str
    lambda1: float
    lambda2: float
    kappa_threshold: float
    growth_bound: float
    stable: bool
    generic_rho: list
    eigenvalue_mismatch: float
    P1_mismatch: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["generic_rho"] = [[z.real, z.imag] for z in self.generic_rho]
        return d


def hx_report(hx: HeatExchangerSpec, N: int | None = None) -> HXReport:
    """Closed-form quantities cross-checked against the generic pipeline.

    ``eigenvalue_mismatch`` compares the closed-form eigenvalues with those of
    the numerically assembled ``A_d``; ``P1_mismatch`` compares ``P(1)``.
    """
    system = validate_system(hx_to_system(hx))
    cls = classify(system)
    geom = build_geometry(system, N)
    sim = solve_P(system, geom)
    res = analyze(system, sim.P1, geom.eta1, cls)
    lam1, lam2 = hx_eigenvalues(hx)
    rho = sorted((ev.rho for ev in res.eigenstructure.eigenvalues), key=lambda z: -z.real)
    # a double eigenvalue is reported once; pad so the comparison still works
    while len(rho) < 2:
        rho.append(rho[0])
    mismatch = max(abs(rho[0] - lam1), abs(rho[1] - lam2))
    P1_err = float(np.max(np.abs(sim.P1 - hx_closed_form_P(hx, 1.0))))
    return HXReport(
        kappa=hx.kappa,
        classification=str(cls.tag),
        lambda1=lam1,
        lambda2=lam2,
        kappa_threshold=hx_kappa_threshold(hx),
        growth_bound=res.growth_bound,
        stable=res.stable,
        generic_rho=[complex(r) for r in rho],
        eigenvalue_mismatch=float(mismatch),
        P1_mismatch=P1_err,
    )
