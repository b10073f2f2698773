"""Classify a three-wave system, list its eigenvalue lattice and decide stability.

Run from the repository root:  python3 demos/classify_and_spectrum.py
"""

from pathlib import Path

from hypspec import analyze, build_geometry, classify, enumerate_modes, load_config, solve_P, validate_system

CONFIG = Path(__file__).parent / "configs" / "three_waves.json"

spec, _ = load_config(CONFIG)
system = validate_system(spec)
cls = classify(system)
print(f"classification: {cls.tag} (rcond K = {cls.condK:.3g}, rcond L = {cls.condL:.3g})")

# travel time, fundamental matrix P and the boundary matrix A_d = -K^{-1} L P(1)
geom = build_geometry(system, 1024)
sim = solve_P(system, geom)
print(f"eta(1) = {geom.eta1:.12f}, ||P P^-1 - I|| = {sim.inverse_defect:.2e}")

res = analyze(system, sim.P1, geom.eta1, cls)
for k, ev in enumerate(res.eigenstructure.eigenvalues, 1):
    print(f"rho_{k} = {ev.rho:.6f}  |rho| = {ev.modulus:.6f}  chains {ev.chain_lengths}")

# every rho_k spawns a vertical line of eigenvalues spaced 2 pi i / eta(1)
print("rightmost modes:")
for mode, mu in enumerate_modes(res, 2)[:6]:
    print(f"  k={mode.k} l={mode.l:+d}  mu = {mu.real:+.6f} {mu.imag:+.6f}i")

print(f"growth bound omega0 = {res.growth_bound:.6f}")
print("exponentially stable" if res.stable else "not exponentially stable")
