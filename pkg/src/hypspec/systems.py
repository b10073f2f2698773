"""System description for the class of hyperbolic networks of waves.

A system is the data ``(n, lambda0, M, K, L)`` of

    dz/dt = -d/dzeta (lambda0 z) + M z,    zeta in [0, 1],
    0 = lambda0(0) K z(0) + lambda0(1) L z(1).

Coefficient profiles are immutable once built.  ``validate_system`` checks the
positivity and shape invariants and ``classify`` decides which spectral regime
the boundary matrices put the operator in.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "HypspecError",
    "NonPositiveSpeed",
    "DimensionMismatch",
    "NonIncreasingGrid",
    "CoefficientProfile",
    "MatrixProfile",
    "SystemSpec",
    "ValidatedSystem",
    "Regime",
    "SpectralClassification",
    "validate_system",
    "classify",
    "DEFAULT_SINGULAR_TOL",
]

DEFAULT_SINGULAR_TOL = 1e-10
_EPS_GRID = 1001


class HypspecError(Exception):
    """Base class for all errors raised by this package."""


class NonPositiveSpeed(HypspecError):
    pass


class DimensionMismatch(HypspecError):
    pass


class NonIncreasingGrid(HypspecError):
    pass


def _check_nodes(nodes: np.ndarray) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2:
        raise NonIncreasingGrid("grid needs at least two nodes")
    if np.any(np.diff(nodes) <= 0):
        raise NonIncreasingGrid("grid nodes must be strictly increasing")
    if nodes[0] != 0.0 or nodes[-1] != 1.0:
        raise NonIncreasingGrid("grid must start at 0 and end at 1")
    return nodes


@dataclass(frozen=True, eq=False)
class CoefficientProfile:
    """Positive scalar coefficient on [0, 1].

    Use the constructors :meth:`constant`, :meth:`affine` and :meth:`sampled`.
    Sampled profiles are interpolated with a monotone (PCHIP) cubic, which
    never overshoots the samples and so keeps positive data positive.
    """

    kind: str
    params: tuple
    _interp: object = field(default=None, repr=False, compare=False)

    @classmethod
    def constant(cls, value: float) -> "CoefficientProfile":
        return cls("constant", (float(value),))

    @classmethod
    def affine(cls, a: float, b: float) -> "CoefficientProfile":
        """The profile ``a + b*zeta``."""
        return cls("affine", (float(a), float(b)))

    @classmethod
    def sampled(cls, nodes, values) -> "CoefficientProfile":
        nodes = _check_nodes(nodes)
        values = np.asarray(values, dtype=float)
        if values.shape != nodes.shape:
            raise DimensionMismatch("profile samples do not match the nodes")
        nodes.flags.writeable = False
        values.flags.writeable = False
        return cls("sampled-grid", (nodes, values), PchipInterpolator(nodes, values))

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        if self.kind == "constant":
            return np.full(zeta.shape, self.params[0])
        if self.kind == "affine":
            a, b = self.params
            return a + b * zeta
        nodes, values = self.params
        out = self._interp(zeta)
        # exact endpoint reproduction
        out = np.where(zeta == 0.0, values[0], out)
        return np.where(zeta == 1.0, values[-1], out)

    def derivative(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        if self.kind == "constant":
            return np.zeros(zeta.shape)
        if self.kind == "affine":
            return np.full(zeta.shape, self.params[1])
        return self._interp.derivative()(zeta)

    def scalar(self):
        """Fast ``float -> float`` evaluator for scalar-heavy callers such as ``quad``.

        Sampled profiles are evaluated by Horner's rule on the PCHIP pieces.
        """
        if self.kind == "constant":
            c = self.params[0]
            return lambda zeta: c
        if self.kind == "affine":
            a, b = self.params
            return lambda zeta: a + b * zeta
        x = self._interp.x.tolist()
        coef = self._interp.c.T.tolist()
        last = len(x) - 2

        def evaluate(zeta):
            i = min(max(bisect.bisect_right(x, zeta) - 1, 0), last)
            c0, c1, c2, c3 = coef[i]
            d = zeta - x[i]
            return ((c0 * d + c1) * d + c2) * d + c3

        return evaluate

    def lower_bound(self) -> float:
        """Estimate of ``min lambda0`` over a 1001-point grid plus the nodes.

        This is an estimate, not a certified bound (exact for constant and
        affine profiles).
        """
        zeta = np.linspace(0.0, 1.0, _EPS_GRID)
        if self.kind == "sampled-grid":
            zeta = np.union1d(zeta, self.params[0])
        return float(np.min(self(zeta)))

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.params[0]}
        if self.kind == "affine":
            return {"kind": "affine", "a": self.params[0], "b": self.params[1]}
        return {
            "kind": "sampled-grid",
            "nodes": self.params[0].tolist(),
            "values": self.params[1].tolist(),
        }


@dataclass(frozen=True, eq=False)
class MatrixProfile:
    """Bounded n x n complex matrix function on [0, 1].

    ``values`` has shape ``(n, n)`` for a constant profile and
    ``(len(nodes), n, n)`` for a sampled one; sampled profiles are interpolated
    entrywise linearly.
    """

    kind: str
    values: np.ndarray
    nodes: np.ndarray | None = None
    func: object = field(default=None, repr=False)
    breaks: tuple = ()

    @classmethod
    def constant(cls, value) -> "MatrixProfile":
        value = np.array(value, dtype=complex)
        if value.ndim != 2 or value.shape[0] != value.shape[1]:
            raise DimensionMismatch("M must be a square matrix")
        value.flags.writeable = False
        return cls("constant", value)

    @classmethod
    def zeros(cls, n: int) -> "MatrixProfile":
        return cls.constant(np.zeros((n, n)))

    @classmethod
    def sampled(cls, nodes, values) -> "MatrixProfile":
        nodes = _check_nodes(nodes)
        values = np.array(values, dtype=complex)
        if values.ndim != 3 or values.shape[0] != nodes.size or values.shape[1] != values.shape[2]:
            raise DimensionMismatch("sampled M must have shape (len(nodes), n, n)")
        nodes.flags.writeable = False
        values.flags.writeable = False
        return cls("sampled-grid", values, nodes)

    @classmethod
    def from_function(cls, func, n: int, probe: int = 1001, breaks=()) -> "MatrixProfile":
        """Wrap a vectorized ``func(zeta) -> (..., n, n)``.

        Not serializable; used for models assembled from other profiles.
        ``values`` keeps samples on a ``probe``-point grid for the bound.
        ``breaks`` lists interior points where ``func`` is not smooth.
        """
        samples = np.asarray(func(np.linspace(0.0, 1.0, probe)), dtype=complex)
        if samples.shape != (probe, n, n):
            raise DimensionMismatch(f"function must return shape (..., {n}, {n})")
        samples.flags.writeable = False
        breaks = tuple(sorted(float(b) for b in breaks if 0.0 < b < 1.0))
        return cls("function", samples, None, func, breaks)

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    @property
    def max_abs(self) -> float:
        # exact for piecewise-linear interpolation (extrema sit at the nodes),
        # a probe estimate for function-backed profiles
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __call__(self, zeta):
        """Evaluate at ``zeta``; returns shape ``zeta.shape + (n, n)``."""
        zeta = np.asarray(zeta, dtype=float)
        if self.kind == "constant":
            return np.broadcast_to(self.values, zeta.shape + self.values.shape).copy()
        if self.kind == "function":
            return np.asarray(self.func(zeta), dtype=complex)
        n = self.n
        flat = self.values.reshape(len(self.nodes), n * n)
        z = np.atleast_1d(zeta).ravel()
        out = np.empty((z.size, n * n), dtype=complex)
        for e in range(n * n):
            out[:, e] = np.interp(z, self.nodes, flat[:, e].real) + 1j * np.interp(
                z, self.nodes, flat[:, e].imag
            )
        return out.reshape(zeta.shape + (n, n))

    def to_dict(self) -> dict:
        from .io import matrix_to_pairs

        if self.kind == "constant":
            return {"kind": "constant", "entries": matrix_to_pairs(self.values)}
        if self.kind == "function":
            raise TypeError("function-backed profiles cannot be serialized")
        return {
            "kind": "sampled-grid",
            "nodes": self.nodes.tolist(),
            "entries": [matrix_to_pairs(v) for v in self.values],
        }


@dataclass(frozen=True, eq=False)
class SystemSpec:
    n: int
    lambda0: CoefficientProfile
    M: MatrixProfile
    K: np.ndarray
    L: np.ndarray

    @classmethod
    def build(cls, lambda0, K, L, M=None) -> "SystemSpec":
        """Convenience constructor accepting scalars/arrays.

        ``lambda0`` may be a number (constant speed) or a profile; ``M`` may be
        None (zero coupling), an array (constant) or a profile.
        """
        K = np.array(np.atleast_2d(K), dtype=complex)
        L = np.array(np.atleast_2d(L), dtype=complex)
        n = K.shape[0]
        if not isinstance(lambda0, CoefficientProfile):
            lambda0 = CoefficientProfile.constant(lambda0)
        if M is None:
            M = MatrixProfile.zeros(n)
        elif not isinstance(M, MatrixProfile):
            M = MatrixProfile.constant(np.atleast_2d(M))
        K.flags.writeable = False
        L.flags.writeable = False
        return cls(n, lambda0, M, K, L)


@dataclass(frozen=True, eq=False)
class ValidatedSystem:
    """A :class:`SystemSpec` whose invariants have been checked.

    ``eps`` is the estimated positive lower bound of ``lambda0``.
    """

    spec: SystemSpec
    eps: float

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def lambda0(self) -> CoefficientProfile:
        return self.spec.lambda0

    @property
    def M(self) -> MatrixProfile:
        return self.spec.M

    @property
    def K(self) -> np.ndarray:
        return self.spec.K

    @property
    def L(self) -> np.ndarray:
        return self.spec.L


def validate_system(spec: SystemSpec) -> ValidatedSystem:
    n = spec.n
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DimensionMismatch(f"n must be a positive integer, got {n!r}")
    for name in ("K", "L"):
        mat = getattr(spec, name)
        if mat.shape != (n, n):
            raise DimensionMismatch(f"{name} has shape {mat.shape}, expected {(n, n)}")
    if spec.M.n != n:
        raise DimensionMismatch(f"M is {spec.M.n}x{spec.M.n}, expected {n}x{n}")
    if not np.isfinite(spec.M.max_abs):
        raise DimensionMismatch("M has non-finite entries")
    eps = spec.lambda0.lower_bound()
    if not eps > 0.0:
        raise NonPositiveSpeed(f"lambda0 is not positive on [0, 1] (min ~ {eps:.6g})")
    return ValidatedSystem(spec, eps)


class Regime(enum.Enum):
    NOT_WELL_POSED = "NotWellPosed"
    SEMIGROUP_ONLY = "SemigroupOnly"
    RIESZ_SPECTRAL_GROUP = "RieszSpectralGroup"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=False)
class SpectralClassification:
    tag: Regime
    condK: float
    condL: float
    tolerance: float

    @property
    def riesz(self) -> bool:
        return self.tag is Regime.RIESZ_SPECTRAL_GROUP


def _rcond(mat: np.ndarray) -> float:
    s = np.linalg.svd(mat, compute_uv=False)
    if s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


def classify(system: ValidatedSystem, singular_tol: float = DEFAULT_SINGULAR_TOL) -> SpectralClassification:
    """Decide the operator regime from the invertibility of K and L.

    K singular: not a semigroup generator.  K invertible, L singular: semigroup
    but not a group.  Both invertible: discrete Riesz-spectral (a group).
    ``condK``/``condL`` are reciprocal 2-norm condition numbers.
    """
    if not singular_tol > 0:
        raise ValueError("singular_tol must be positive")
    rk, rl = _rcond(system.K), _rcond(system.L)
    if rk <= singular_tol:
        tag = Regime.NOT_WELL_POSED
    elif rl <= singular_tol:
        tag = Regime.SEMIGROUP_ONLY
    else:
        tag = Regime.RIESZ_SPECTRAL_GROUP
    return SpectralClassification(tag, rk, rl, singular_tol)
