import math

import numpy as np
import pytest

from hypspec import (
    CoefficientProfile,
    HeatExchangerSpec,
    HypspecError,
    Regime,
    analyze,
    build_geometry,
    classify,
    hx_boundary_matrix,
    hx_closed_form_P,
    hx_eigenvalues,
    hx_kappa_threshold,
    hx_report,
    hx_to_system,
    solve_P,
    stability_verdict,
    validate_system,
)

from _systems import random_profile

BASE = HeatExchangerSpec(1.0, 1.0, 1.0, 1.0)
E2 = math.exp(-2.0)


def random_hx(rng, kappa=1.0, kinds=("constant", "affine", "sampled")):
    return HeatExchangerSpec(random_profile(rng, kinds), random_profile(rng, kinds), random_profile(rng, kinds), kappa)


def test_system_matrices():
    spec = hx_to_system(BASE)
    assert spec.n == 2 and spec.M.kind == "constant"
    np.testing.assert_array_equal(spec.M.values, [[-1, 1], [1, -1]])
    np.testing.assert_array_equal(spec.K, np.diag([-1, 1]))
    np.testing.assert_array_equal(spec.L, [[-1, 1], [0, -1]])


def test_always_riesz_and_kappa_positive():
    rng = np.random.default_rng(50)
    for _ in range(10):
        hx = random_hx(rng, rng.uniform(0.01, 10))
        assert classify(validate_system(hx_to_system(hx))).tag is Regime.RIESZ_SPECTRAL_GROUP
    for bad in (0.0, -1.0):
        with pytest.raises(HypspecError):
            HeatExchangerSpec(1.0, 1.0, 1.0, bad)
    with pytest.raises(HypspecError):
        HeatExchangerSpec(CoefficientProfile.affine(1, -2), 1.0, 1.0, 1.0)


def test_closed_form_P_examples():
    np.testing.assert_array_equal(hx_closed_form_P(BASE, 0.0), np.eye(2))
    d = 1 - (1 - E2) / 2
    np.testing.assert_allclose(hx_closed_form_P(BASE, 1.0), [[d, d - E2], [d - E2, d]], atol=1e-13)
    zs = np.array([0.7, 0.1, 1.0, 0.0])
    stacked = hx_closed_form_P(BASE, zs)
    for z, P in zip(zs, stacked):
        np.testing.assert_allclose(P, hx_closed_form_P(BASE, float(z)), atol=1e-13)


def test_closed_form_matches_generic_P_at_every_node():
    rng = np.random.default_rng(51)
    for _ in range(3):
        hx = random_hx(rng)
        vs = validate_system(hx_to_system(hx))
        geom = build_geometry(vs, 128)
        sim = solve_P(vs, geom)
        closed = hx_closed_form_P(hx, geom.grid)
        assert np.abs(closed - sim.P_values).max() <= 1e-8


def test_boundary_matrix_closed_form():
    rng = np.random.default_rng(52)
    hx = random_hx(rng, 2.0)
    vs = validate_system(hx_to_system(hx))
    sim = solve_P(vs, build_geometry(vs))
    A_generic = analyze(vs, sim.P1, 1.0).eigenstructure.A_d
    np.testing.assert_allclose(hx_boundary_matrix(hx), A_generic, atol=1e-9)
    eh, I1, I2 = hx.end_values
    assert eh == pytest.approx(math.exp(hx.h(1.0)))
    k = hx.kappa
    np.testing.assert_allclose(hx_boundary_matrix(hx), [[-k * eh, k * eh], [1 - eh - I1, 1 - I2]])


def test_baseline_eigenvalues_and_threshold():
    lam1, lam2 = hx_eigenvalues(BASE)
    assert lam1 == pytest.approx(0.6428547075843133, abs=1e-9)
    assert lam2 == pytest.approx(-0.21052234920261959, abs=1e-9)
    kstar = hx_kappa_threshold(BASE)
    assert kstar == pytest.approx(0.5 * math.exp(2) * (2 - (1 - E2) / 2), abs=1e-12)
    assert kstar == pytest.approx(5.791792074197988, abs=1e-9)


def test_eigenvalue_signs_and_unit_bound():
    rng = np.random.default_rng(53)
    for _ in range(100):
        hx = random_hx(rng, kinds=("constant", "affine"))
        kstar = hx_kappa_threshold(hx)
        assert kstar > 0
        hx = hx.with_kappa(rng.uniform(0.01, 2 * kstar))
        lam1, lam2 = hx_eigenvalues(hx)
        assert 0 < lam1 < 1
        assert lam2 < 0
        if hx.kappa < kstar:
            assert lam2 > -1
        else:
            assert lam2 <= -1 + 1e-12


def test_threshold_examples_and_single_flip():
    kstar = hx_kappa_threshold(BASE)
    vs = validate_system(hx_to_system(BASE))
    P1 = solve_P(vs, build_geometry(vs)).P1

    def verdict(kappa):
        spec = validate_system(hx_to_system(BASE.with_kappa(kappa)))
        return stability_verdict(analyze(spec, P1, 1.0).eigenstructure)

    assert verdict(0.9 * kstar) and not verdict(1.1 * kstar)
    flips = np.diff([verdict(k) for k in np.linspace(2 * kstar / 200, 2 * kstar, 200)].copy())
    assert np.count_nonzero(flips) == 1


def test_threshold_itself_is_unstable():
    hx = BASE.with_kappa(hx_kappa_threshold(BASE))
    assert hx_eigenvalues(hx)[1] == pytest.approx(-1.0, abs=1e-12)
    # exactly at the threshold the closed form sits on the unit circle
    assert not abs(hx_eigenvalues(hx)[1]) < 1 - 1e-12


def test_verdict_equivalence_random():
    rng = np.random.default_rng(54)
    for _ in range(100):
        hx = random_hx(rng)
        kstar = hx_kappa_threshold(hx)
        vs = validate_system(hx_to_system(hx))
        geom = build_geometry(vs, 64)
        P1 = solve_P(vs, geom).P1
        for kappa in kstar * rng.choice([0.2, 0.7, 0.95, 1.05, 1.6], 5, replace=False):
            spec = validate_system(hx_to_system(hx.with_kappa(kappa)))
            assert stability_verdict(analyze(spec, P1, geom.eta1).eigenstructure) == (kappa < kstar)


def test_report():
    rep = hx_report(BASE)
    assert rep.stable and rep.classification == "RieszSpectralGroup"
    assert rep.eigenvalue_mismatch <= 1e-8 and rep.P1_mismatch <= 1e-8
    assert rep.growth_bound < 0
    assert not hx_report(BASE.with_kappa(6.0)).stable
    d = rep.to_dict()
    assert d["generic_rho"][0] == pytest.approx([rep.lambda1, 0.0], abs=1e-8)
    rng = np.random.default_rng(55)
    rep2 = hx_report(random_hx(rng, 1.5))
    assert rep2.eigenvalue_mismatch <= 1e-8
