"""Evolve a state exactly along characteristics and by a truncated modal sum.

The characteristics solution is exact up to interpolation; the modal sum
converges to it as more lattice points are kept.

Run from the repository root:  python3 demos/oracle_vs_modes.py
"""

import numpy as np

from hypspec import (
    CharacteristicsOracle,
    CoefficientProfile,
    MatrixProfile,
    SystemSpec,
    analyze,
    build_geometry,
    build_weight,
    classify,
    compare_methods,
    modal_simulate,
    project_initial_state,
    smooth_initial_state,
    solve_P,
    state_norm,
    validate_system,
)

rng = np.random.default_rng(1)
lam = CoefficientProfile.sampled(np.linspace(0, 1, 6), [1.0, 1.3, 0.9, 1.1, 1.4, 1.2])
M = MatrixProfile.constant([[-0.3, 0.2], [0.1, -0.2]])
system = validate_system(SystemSpec.build(lam, np.eye(2), [[-0.4, 0.3], [0.1, -0.6]], M))
cls = classify(system)
geom = build_geometry(system, 2048)
res = analyze(system, solve_P(system, geom).P1, geom.eta1, cls)
es = res.eigenstructure
print(f"omega0 = {res.growth_bound:.4f}, stable: {res.stable}")

# smooth data compatible with the boundary coupling, in transformed variables
z0 = smooth_initial_state(es, geom, rng)
oracle = CharacteristicsOracle(es.A_d, geom, z0)
W = build_weight(es, geom)

for t in (0.3, 1.0, 2.5):
    ref = oracle(t * geom.eta1)
    errs = []
    for l_max in (4, 16, 64):
        coeffs = project_initial_state(z0, es, W, geom, l_max)
        errs.append(compare_methods(ref, modal_simulate(coeffs, geom, t * geom.eta1), geom)[1])
    cells = "  ".join(f"l_max {m}: {e:.1e}" for m, e in zip((4, 16, 64), errs))
    print(f"t = {t} eta(1): |z| = {state_norm(ref, geom):.4f}   relative error {cells}")
