import math

import numpy as np
import pytest

from hypspec import (
    CoefficientProfile,
    ModeIndex,
    SystemSpec,
    analyze,
    boundary_matrix,
    classify,
    eigen_structure,
    enumerate_modes,
    growth_bound,
    mode_eigenvalue,
    stability_verdict,
    validate_system,
)
from hypspec.spectrum import SingularK, ZeroEigenvalue

from _systems import pipeline, random_boundary_matrix, random_spec


def vs(K, L, lam=1.0, M=None):
    return validate_system(SystemSpec.build(lam, K, L, M))


def test_boundary_matrix_examples():
    np.testing.assert_array_equal(boundary_matrix(vs(np.eye(2), -np.eye(2)), np.eye(2)), np.eye(2))
    np.testing.assert_allclose(boundary_matrix(vs([[1]], [[-0.5]]), [[1]]), [[0.5]])
    bad = vs(np.zeros((2, 2)), np.eye(2))
    with pytest.raises(SingularK):
        boundary_matrix(bad, np.eye(2), classify(bad))


def test_diagonal_structure():
    es = eigen_structure(np.diag([0.5, 1 / 3]))
    np.testing.assert_allclose(es.rho, [0.5, 1 / 3])
    assert [(ev.algebraic, ev.geometric) for ev in es.eigenvalues] == [(1, 1), (1, 1)]
    assert es.diagonalizable


def test_jordan_block_structure():
    es = eigen_structure([[0.5, 1], [0, 0.5]])
    (ev,) = es.eigenvalues
    assert ev.rho == 0.5 and ev.algebraic == 2 and ev.geometric == 1
    assert ev.chain_lengths == [2]
    v, bv = ev.chains[0]
    np.testing.assert_allclose(v, [0, 1], atol=1e-14)
    np.testing.assert_allclose(bv, [-1, 0], atol=1e-14)
    np.testing.assert_array_equal(ev.eigenvectors[0], bv)
    assert not es.diagonalizable


def test_identity_has_two_chains():
    (ev,) = eigen_structure(np.eye(2)).eigenvalues
    assert ev.rho == 1 and ev.algebraic == 2 and ev.geometric == 2 and ev.chain_lengths == [1, 1]


def test_chain_invariants_random():
    rng = np.random.default_rng(20)
    J = np.zeros((4, 4), dtype=complex)
    J[:3, :3] = np.diag([0.7, 0.7, 0.7]) + np.diag([1, 1], 1)
    J[3, 3] = -0.4
    for _ in range(5):
        S = rng.normal(size=(4, 4)) + 4 * np.eye(4)
        A = S @ J @ np.linalg.inv(S)
        es = eigen_structure(A, rank_tol=1e-6)
        assert sum(ev.algebraic for ev in es.eigenvalues) == 4
        for ev in es.eigenvalues:
            B = ev.rho * np.eye(4) - es.A_d
            for ch in ev.chains:
                p = len(ch)
                v = ch[0]
                assert np.linalg.norm(np.linalg.matrix_power(B, p) @ v) <= 1e-6
                assert np.linalg.norm(np.linalg.matrix_power(B, p - 1) @ v) > es.rank_tol
                top = ch[-1]
                assert np.linalg.norm(top) == pytest.approx(1.0)


def test_eigenvector_phase_convention():
    rng = np.random.default_rng(21)
    es = eigen_structure(random_boundary_matrix(rng, 3))
    for v in es.eigenbasis()[0].T:
        assert np.linalg.norm(v) == pytest.approx(1.0)
        lead = v[np.nonzero(np.abs(v) > es.rank_tol)[0][0]]
        assert lead.imag == 0 and lead.real > 0


def test_mode_eigenvalue_examples():
    es = eigen_structure([[0.5]])
    assert mode_eigenvalue(es, 1.0, 1, 0) == pytest.approx(-math.log(2), abs=1e-15)
    es1 = eigen_structure([[1.0]])
    assert mode_eigenvalue(es1, 1.0, 1, 3) == pytest.approx(6j * math.pi, abs=1e-14)
    esm = eigen_structure([[-0.5]])
    assert esm.eigenvalues[0].theta == pytest.approx(math.pi)
    assert mode_eigenvalue(esm, 0.5, 1, 0) == pytest.approx(2 * complex(math.log(0.5), math.pi), abs=1e-14)
    with pytest.raises(ZeroEigenvalue):
        mode_eigenvalue(eigen_structure([[0.0]]), 1.0, 1, 0)


def test_theta_branch():
    for z in (1, 1j, -1, -1j, np.exp(-1e-3j)):
        theta = eigen_structure([[z]]).eigenvalues[0].theta
        assert 0 <= theta < 2 * math.pi
        assert np.exp(1j * theta) == pytest.approx(z)


def test_growth_bound_and_verdict():
    assert growth_bound(eigen_structure(np.diag([0.5, 1 / 3])), 1.0) == pytest.approx(math.log(0.5))
    assert growth_bound(eigen_structure([[1.0]]), 0.3) == 0.0
    assert growth_bound(eigen_structure([[2.0]]), 0.5) == pytest.approx(2 * math.log(2))
    assert stability_verdict(eigen_structure(np.diag([0.5, -0.2])))
    assert not stability_verdict(eigen_structure([[1.0]]))


def test_enumerate_modes_examples():
    res = analyze(vs([[1]], [[-0.5]]), [[1]], 1.0)
    modes = enumerate_modes(res, 1)
    assert [m.l for m, _ in modes] == [0, -1, 1]
    assert all(mu.real == pytest.approx(-math.log(2)) for _, mu in modes)
    res2 = analyze(vs(np.eye(2), -np.diag([0.25, 0.5])), np.eye(2), 1.0)
    modes2 = enumerate_modes(res2, 0)
    assert len(modes2) == 2
    assert [res2.eigenstructure.eigenvalues[m.k - 1].rho for m, _ in modes2] == [0.5, 0.25]
    with pytest.raises(ValueError):
        enumerate_modes(res2, -1)
    assert modes2[0][0] == ModeIndex(1, 0)


def test_lattice_identities_random():
    rng = np.random.default_rng(22)
    for _ in range(5):
        p = pipeline(random_spec(rng))
        res = p.res
        dz = 2j * math.pi / res.eta1
        assert res.stable == (res.growth_bound < 0)
        for k, ev in enumerate(p.es.eigenvalues, 1):
            for l in range(-50, 51):
                mu = res.lattice(k, l)
                assert abs(np.exp(mu * res.eta1) - ev.rho) <= 1e-12 * abs(ev.rho)
                step = res.lattice(k, l + 1) - mu
                assert abs(step - dz) <= 1e-14 * max(abs(mu), abs(dz)) * 4
        assert res.growth_bound == pytest.approx(max(m.real for _, m in enumerate_modes(res, 3)))


def test_speed_scaling():
    rng = np.random.default_rng(23)
    spec = random_spec(rng, n=2)
    c = 2.5
    lam = spec.lambda0
    scaled_lam = CoefficientProfile.affine(*(c * np.array(lam.params))) if lam.kind == "affine" else None
    if scaled_lam is None:
        lam = CoefficientProfile.affine(1.0, 0.5)
        spec = SystemSpec.build(lam, spec.K, spec.L, spec.M)
        scaled_lam = CoefficientProfile.affine(c, 0.5 * c)
    scaled = SystemSpec.build(scaled_lam, spec.K, spec.L, c * spec.M.values)
    a, b = pipeline(spec), pipeline(scaled)
    np.testing.assert_allclose(b.es.rho, a.es.rho, atol=1e-9)
    for k in range(1, a.es.n_distinct + 1):
        for l in (-2, 0, 3):
            assert b.res.lattice(k, l) == pytest.approx(c * a.res.lattice(k, l), rel=1e-9)
