"""Generalized eigenfunctions of a defective boundary matrix.

``K = I`` and ``L = -A_d`` with ``M = 0`` make ``A_d = [[1/2, 1], [0, 1/2]]``
the boundary matrix, a single Jordan block.  Each lattice point then carries
an eigenfunction ``phi_1`` and a generalized eigenfunction ``phi_2`` with
``(mu - A) phi_2 = phi_1`` and ``(mu - A)^2 phi_2 = 0``.

Run from the repository root:  python3 demos/jordan_chain.py
"""

import numpy as np

from hypspec import (
    CoefficientProfile,
    SystemSpec,
    analyze,
    build_geometry,
    chain_residuals,
    classify,
    generalized_eigenfunction,
    jordan_omegas,
    solve_P,
    validate_system,
)

A_d = np.array([[0.5, 1.0], [0.0, 0.5]])
system = validate_system(SystemSpec.build(CoefficientProfile.affine(1.0, 1.0), np.eye(2), -A_d))
cls = classify(system)
geom = build_geometry(system, 2048, m_max=1)
res = analyze(system, solve_P(system, geom).P1, geom.eta1, cls)
ev = res.eigenstructure.eigenvalues[0]
print(f"rho = {ev.rho.real:g}, algebraic multiplicity {ev.algebraic}, chains {ev.chain_lengths}")

omegas = jordan_omegas(ev.rho, ev.chains[0], [geom.omega_at_end(1)], res.eigenstructure.A_d)
print("omega_1 =", np.round(omegas[0], 6), " omega_2 =", np.round(omegas[1], 6))

for l in (0, 3, -7):
    phi2 = generalized_eigenfunction(1, l, 2, omegas, res.eigenstructure, geom)
    r2, r1 = chain_residuals(phi2)
    print(f"l = {l:+d}: ||(mu-A)^2 phi_2|| = {r2:.2e}, ||(mu-A) phi_2|| = {r1:.4f}")
