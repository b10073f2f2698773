"""Grid quadrature and differentiation on the equispaced master grid."""

from __future__ import annotations

import numpy as np

__all__ = ["simpson", "cumulative_simpson", "fd_weights", "derivative"]


def _check_even(npts: int) -> None:
    if (npts - 1) % 2:
        raise ValueError(f"Simpson rule needs an even number of intervals, got {npts - 1}")


def simpson(f, h: float, axis: int = 0):
    """Composite Simpson rule for samples ``f`` with spacing ``h``."""
    f = np.moveaxis(np.asarray(f), axis, 0)
    _check_even(f.shape[0])
    return h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum(axis=0) + 2.0 * f[2:-1:2].sum(axis=0))


def cumulative_simpson(f, h: float, breaks=()):
    """Running integral ``F[i] = int_0^{x_i} f`` along axis 0.

    Even nodes get the composite Simpson value.  An odd node adds a
    cubic-exact half-panel rule to the even node before it, the centred
    ``h/24 (-f_{-1} + 13 f0 + 13 f1 - f2)`` or, in the first panel, the
    one-sided ``h/24 (9 f0 + 19 f1 - 5 f2 + f3)``.  Every node is therefore
    fourth-order accurate.  ``breaks`` are even interior indices where ``f``
    is not smooth; the pieces between them are integrated separately.
    """
    f = np.asarray(f)
    _check_even(f.shape[0])
    cuts = sorted({int(b) for b in breaks if 0 < b < f.shape[0] - 1})
    if cuts:
        if any(c % 2 for c in cuts):
            raise ValueError("breaks must be even indices")
        out = np.zeros_like(f, dtype=np.result_type(f, float))
        for a, b in zip([0] + cuts, cuts + [f.shape[0] - 1]):
            out[a:b + 1] = out[a] + cumulative_simpson(f[a:b + 1], h)
        return out
    if f.shape[0] < 5:
        raise ValueError("need at least four intervals")
    out = np.zeros_like(f, dtype=np.result_type(f, float))
    panels = h / 3.0 * (f[0:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
    out[2::2] = np.cumsum(panels, axis=0)
    out[1] = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
    out[3::2] = out[2:-2:2] + h / 24.0 * (-f[1:-3:2] + 13.0 * f[2:-2:2] + 13.0 * f[3:-1:2] - f[4::2])
    return out


def fd_weights(x0: float, xs, m: int = 1) -> np.ndarray:
    """Finite-difference weights for the ``m``-th derivative at ``x0`` (Fornberg)."""
    xs = np.asarray(xs, dtype=float)
    n = xs.size
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5 = 1.0, c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def derivative(f, h: float, order: int = 8, breaks=()):
    """First derivative along axis 0 with an ``order``-accurate stencil.

    Central differences in the interior, one-sided stencils of the same order
    at the ends.  ``breaks`` are interior indices where ``f`` may have a
    kink; each piece is differentiated on its own and the two one-sided
    values at a break are averaged.
    """
    if order % 2 or order < 2:
        raise ValueError("order must be a positive even integer")
    f = np.asarray(f)
    cuts = sorted({int(b) for b in breaks if 0 < b < f.shape[0] - 1})
    if cuts:
        out = np.zeros_like(f, dtype=np.result_type(f, float))
        count = np.zeros(f.shape[0])
        for a, b in zip([0] + cuts, cuts + [f.shape[0] - 1]):
            out[a:b + 1] += derivative(f[a:b + 1], h, order)
            count[a:b + 1] += 1
        return out / count.reshape((-1,) + (1,) * (f.ndim - 1))
    npts = f.shape[0]
    half = order // 2
    if npts < order + 1:
        raise ValueError("grid too small for the requested stencil")
    out = np.zeros_like(f, dtype=np.result_type(f, float))
    w = fd_weights(0.0, np.arange(-half, half + 1))
    for k, wk in enumerate(w):
        if wk != 0.0:
            out[half:npts - half] += wk * f[k:npts - order + k]
    for i in range(half):
        wl = fd_weights(float(i), np.arange(order + 1))
        out[i] = np.tensordot(wl, f[: order + 1], axes=(0, 0))
        wr = fd_weights(float(order - i), np.arange(order + 1))
        out[npts - 1 - i] = np.tensordot(wr, f[npts - order - 1:], axes=(0, 0))
    return out / h
