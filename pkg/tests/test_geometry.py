import math

import numpy as np
import pytest
from scipy.integrate import quad

from hypspec import CoefficientProfile, OutOfRange, SystemSpec, build_geometry, eta_inverse, validate_system
from hypspec.quadrature import derivative

from _systems import random_profile


def geometry(lam, N=None, m_max=None, n=1):
    vs = validate_system(SystemSpec.build(lam, np.eye(n), -np.eye(n)))
    return build_geometry(vs, N, m_max)


def test_unit_speed_tables():
    g = geometry(1.0, N=100, m_max=4)
    np.testing.assert_allclose(g.eta_values, g.grid, atol=1e-15)
    assert g.eta1 == pytest.approx(1.0, abs=1e-15)
    for m in range(1, 5):
        np.testing.assert_allclose(g.omega_values(m), g.grid**m / math.factorial(m), atol=1e-14)


def test_speed_two():
    g = geometry(2.0, m_max=2)
    assert g.eta1 == pytest.approx(0.5, abs=1e-15)
    assert g.omega_at_end(1) == pytest.approx(0.5, abs=1e-15)
    assert g.omega_at_end(2) == pytest.approx(0.125, abs=1e-15)


def test_affine_speed_matches_adaptive_quadrature():
    g = geometry(CoefficientProfile.affine(1, 1))
    ref = quad(lambda x: 1 / (1 + x), 0, 1, epsabs=1e-14)[0]
    assert abs(g.eta1 - ref) <= 1e-12
    assert g.eta1 == pytest.approx(math.log(2), abs=1e-12)


def test_table_invariants():
    rng = np.random.default_rng(1)
    for _ in range(5):
        g = geometry(random_profile(rng), m_max=3)
        assert g.eta_values[0] == 0 and np.all(np.diff(g.eta_values) > 0)
        np.testing.assert_array_equal(g.omega_values(1), g.eta_values)
        np.testing.assert_array_equal(g.omega_values(0), 1.0)
        for m in range(1, 4):
            assert g.omega_values(m)[0] == 0
            assert np.all(np.diff(g.omega_values(m)) >= 0)
        with pytest.raises(IndexError):
            g.omega_values(4)


def test_omega_derivative_identity():
    rng = np.random.default_rng(2)
    for _ in range(3):
        lam = random_profile(rng, kinds=("constant", "affine"))
        g = geometry(lam, m_max=3)
        for m in range(1, 4):
            d = derivative(g.omega_values(m), g.h)
            np.testing.assert_allclose(d, g.omega_values(m - 1) / g.lambda_values, rtol=0, atol=1e-9)


def test_interpolated_evaluation_between_nodes():
    g = geometry(CoefficientProfile.affine(1, 1), N=64, m_max=2)
    z = np.linspace(0, 1, 999)
    np.testing.assert_allclose(g.eta(z), np.log1p(z), atol=1e-8)
    np.testing.assert_allclose(g.omega(2, z), 0.5 * np.log1p(z) ** 2, atol=1e-8)


@pytest.mark.parametrize("lam, s, zeta", [(1.0, 0.25, 0.25), (2.0, 0.25, 0.5), (None, math.log(1.5), 0.5)])
def test_eta_inverse_examples(lam, s, zeta):
    g = geometry(CoefficientProfile.affine(1, 1) if lam is None else lam)
    assert eta_inverse(g, s) == pytest.approx(zeta, abs=1e-10)


def test_eta_inverse_round_trip_and_range():
    rng = np.random.default_rng(3)
    g = geometry(random_profile(rng, kinds=("sampled",)))
    z = rng.uniform(0, 1, 100)
    np.testing.assert_allclose(eta_inverse(g, g.eta(z)), z, atol=1e-8)
    assert eta_inverse(g, 0.0) == 0.0 and eta_inverse(g, g.eta1) == 1.0
    with pytest.raises(OutOfRange):
        eta_inverse(g, -1e-3)
    with pytest.raises(OutOfRange):
        eta_inverse(g, g.eta1 * 1.01)


def test_simpson_order_under_refinement():
    lam = CoefficientProfile.affine(1, 1)
    errs = []
    for N in (32, 64, 128):
        g = geometry(lam, N=N)
        errs.append(np.max(np.abs(g.eta_values - np.log1p(g.grid))))
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8


def test_grid_size_checks(monkeypatch):
    with pytest.raises(ValueError):
        geometry(1.0, N=15)
    with pytest.raises(ValueError):
        geometry(1.0, N=34, m_max=0)
    monkeypatch.setenv("HYPSPEC_GRID_N", "64")
    assert geometry(1.0).N == 64


def test_piecewise_quadrature_at_speed_kinks():
    nodes = np.linspace(0, 1, 9)
    lam = CoefficientProfile.sampled(nodes, [1.0, 1.6, 0.7, 1.2, 1.9, 0.8, 1.1, 1.5, 1.0])
    g = geometry(lam, N=2048)
    assert g.kinks == tuple(range(256, 2048, 256))
    # odd nodes next to a kink are where a rule reaching across it goes wrong
    idx = [k + d for k in g.kinks for d in (-1, 1)] + list(range(0, 2049, 37))
    exact = np.array([quad(lambda x: 1.0 / lam(x), 0, g.grid[i], points=nodes[1:-1], epsabs=1e-15)[0] for i in idx])
    assert np.max(np.abs(g.eta_values[idx] - exact)) < 1e-11
    from hypspec.quadrature import cumulative_simpson

    unsplit = cumulative_simpson(1.0 / g.lambda_values, g.h)
    assert np.max(np.abs(unsplit[idx] - exact)) > 1e-10
    # nodes off the grid are skipped, dense ones thinned to 8 intervals
    assert geometry(CoefficientProfile.sampled([0, 0.3, 1], [1, 2, 1]), N=64).kinks == ()
    assert geometry(lam, N=32).kinks == (8, 16, 24)


def test_piecewise_derivative_and_cumulative_rule():
    from hypspec.quadrature import cumulative_simpson

    x = np.linspace(0, 1, 257)
    h = x[1]
    f = np.abs(x - 0.5) ** 3  # jump in the third derivative at x = 0.5
    exact = 3 * np.sign(x - 0.5) * (x - 0.5) ** 2
    plain = np.max(np.abs(derivative(f, h) - exact))
    split = np.max(np.abs(derivative(f, h, breaks=[128]) - exact))
    assert split < 1e-12 < plain
    g = np.where(x < 0.5, 0.5, x)  # kink at 0.5
    F = np.where(x < 0.5, 0.5 * x, 0.25 + (x**2 - 0.25) / 2)
    assert np.max(np.abs(cumulative_simpson(g, h, [128]) - F)) < 1e-15
    assert np.max(np.abs(cumulative_simpson(g, h) - F)) > 1e-8
    with pytest.raises(ValueError):
        cumulative_simpson(g, h, [127])
