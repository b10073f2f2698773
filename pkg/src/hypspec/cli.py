"""Command-line front end.

Every subcommand loads a JSON or YAML system config (or, for ``hx``, builds
the heat exchanger from flags), runs the relevant stage of the pipeline,
prints a short summary and optionally writes a CSV or JSON artifact.

Exit codes: 0 ok or stable, 2 invalid input, 3 unstable (``stability``),
4 not Riesz-spectral, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import __version__
from .eigenfunctions import (
    DefectiveChain,
    IndexOutOfChain,
    NoEigenvector,
    NotDiagonalizable,
    build_weight,
    eigenfunction,
    generalized_eigenfunction,
    jordan_omegas,
    project_initial_state,
)
from .geometry import DEFAULT_GRID_N, OutOfRange, build_geometry, default_grid_size
from .heat_exchanger import HeatExchangerSpec, hx_report
from .io import (
    ConfigError,
    atomic_write_text,
    field_table,
    load_config,
    parse_profile_shorthand,
    read_field_csv,
    write_csv,
    write_json_table,
)
from .semigroup import NegativeTime, simulate_original, smooth_initial_state, state_norm
from .similarity import IntegratorFailure, inverse_transform, solve_P, transform_state
from .spectrum import DEFAULT_RANK_TOL, EigDecompFailure, SingularK, ZeroEigenvalue, analyze, enumerate_modes
from .systems import (
    DEFAULT_SINGULAR_TOL,
    DimensionMismatch,
    HypspecError,
    NonIncreasingGrid,
    NonPositiveSpeed,
    classify,
    validate_system,
)

__all__ = ["EXIT_OK", "EXIT_INVALID", "EXIT_UNSTABLE", "EXIT_NOT_RIESZ", "EXIT_NUMERICAL", "build_parser", "run", "main"]

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNSTABLE = 3
EXIT_NOT_RIESZ = 4
EXIT_NUMERICAL = 5

_INVALID = (ConfigError, DimensionMismatch, NonPositiveSpeed, NonIncreasingGrid, OutOfRange, NegativeTime)
_NOT_RIESZ = (SingularK, ZeroEigenvalue)
_NUMERICAL = (IntegratorFailure, EigDecompFailure, DefectiveChain, np.linalg.LinAlgError)


class NotRiesz(HypspecError):
    pass


@dataclass
class Pipeline:
    """Lazily evaluated stages for one config; each stage is computed once."""

    args: argparse.Namespace

    def __post_init__(self):
        spec, tol = load_config(self.args.config)
        self.system = validate_system(spec)
        if self.args.singular_tol is not None:
            tol = self.args.singular_tol
        self.singular_tol = DEFAULT_SINGULAR_TOL if tol is None else tol
        self._cache = {}

    def _get(self, name, make):
        if name not in self._cache:
            self._cache[name] = make()
        return self._cache[name]

    @property
    def classification(self):
        return self._get("cls", lambda: classify(self.system, self.singular_tol))

    @property
    def geometry(self):
        return self._get("geom", lambda: build_geometry(self.system, self.args.grid_n))

    @property
    def similarity(self):
        return self._get("sim", lambda: solve_P(self.system, self.geometry, rtol=self.args.rtol))

    def require_riesz(self):
        cls = self.classification
        if not cls.riesz:
            raise NotRiesz(f"classification: {cls.tag} (rcond K={cls.condK:.3g}, rcond L={cls.condL:.3g})")
        return cls

    @property
    def spectrum(self):
        def make():
            cls = self.require_riesz()
            return analyze(self.system, self.similarity.P1, self.geometry.eta1, cls, self.args.rank_tol)

        return self._get("spec", make)


def _emit(args, summary: dict, lines: list) -> None:
    if args.format == "json":
        print(json.dumps(summary, indent=2, sort_keys=True, default=_json_default))
    else:
        print("\n".join(lines))


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x).__name__)


def _write_table(args, path, header, rows) -> None:
    if args.format == "json":
        write_json_table(path, header, rows)
    else:
        write_csv(path, header, rows)


def _write_json(path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _load_init(path, geom, n: int) -> np.ndarray:
    """Read a state CSV and resample it onto the master grid by cubic interpolation."""
    try:
        zeta, values = read_field_csv(path)
    except OSError as exc:
        raise ConfigError("--init", str(exc)) from None
    except (ValueError, StopIteration):
        raise ConfigError("--init", f"cannot parse {path}") from None
    if values.shape[1] != n:
        raise ConfigError("--init", f"expected {n} components, found {values.shape[1]}")
    if zeta.size < 2 or np.any(np.diff(zeta) <= 0):
        raise ConfigError("--init", "zeta column must be strictly increasing")
    if abs(zeta[0]) > 1e-12 or abs(zeta[-1] - 1.0) > 1e-12:
        raise ConfigError("--init", "zeta column must span [0, 1]")
    if zeta.size == geom.grid.size and np.allclose(zeta, geom.grid, rtol=0, atol=1e-15):
        return values
    return CubicSpline(zeta, values, axis=0)(geom.grid)


def _initial_state(pipe: Pipeline, args):
    """Original-coordinate initial state: from ``--init`` or random smooth data from ``--seed``."""
    geom = pipe.geometry
    if args.init:
        return _load_init(args.init, geom, pipe.system.n), f"file {args.init}"
    es = pipe.spectrum.eigenstructure
    z = smooth_initial_state(es, geom, args.seed)
    return inverse_transform(pipe.similarity, z), f"random smooth state (seed {args.seed})"


def cmd_validate(pipe: Pipeline, args) -> int:
    s = pipe.system
    lam = s.lambda0
    summary = {"n": s.n, "lambda0_kind": lam.kind, "lambda0_min": lam.lower_bound(), "M_kind": s.M.kind, "valid": True}
    _emit(args, summary, [
        f"config {args.config}: valid",
        f"  n = {s.n}",
        f"  lambda0: {lam.kind}, min {lam.lower_bound():.6g}",
        f"  M: {s.M.kind}",
    ])
    return EXIT_OK


def cmd_classify(pipe: Pipeline, args) -> int:
    cls = pipe.classification
    summary = {"classification": str(cls.tag), "rcond_K": cls.condK, "rcond_L": cls.condL, "tolerance": cls.tolerance}
    _emit(args, summary, [
        f"classification: {cls.tag}",
        f"  rcond(K) = {cls.condK:.3e}",
        f"  rcond(L) = {cls.condL:.3e}",
        f"  tolerance = {cls.tolerance:.1e}",
    ])
    return EXIT_OK if cls.riesz else EXIT_NOT_RIESZ


def cmd_geometry(pipe: Pipeline, args) -> int:
    g = pipe.geometry
    if args.out:
        header = ["zeta", "eta"] + [f"omega_{m}" for m in range(1, g.m_max + 1)]
        body = np.column_stack([g.grid, g.eta_values] + [g.omega_values(m) for m in range(1, g.m_max + 1)])
        _write_table(args, args.out, header, body.tolist())
    summary = {"N": g.N, "eta1": g.eta1, "m_max": g.m_max, "omega_end": [g.omega_at_end(m) for m in range(1, g.m_max + 1)]}
    _emit(args, summary, [
        f"grid: N = {g.N}",
        f"eta(1) = {g.eta1:.15g}",
        *(f"Omega_{m}(1) = {g.omega_at_end(m):.15g}" for m in range(1, g.m_max + 1)),
        *([f"wrote {args.out}"] if args.out else []),
    ])
    return EXIT_OK


def cmd_similarity(pipe: Pipeline, args) -> int:
    sim = pipe.similarity
    n = sim.n
    if args.out:
        header = ["zeta"]
        for name in ("P", "Pinv"):
            for i in range(n):
                for j in range(n):
                    header += [f"Re_{name}_{i + 1}{j + 1}", f"Im_{name}_{i + 1}{j + 1}"]
        cols = [sim.grid]
        for arr in (sim.P_values, sim.Pinv_values):
            flat = arr.reshape(arr.shape[0], n * n)
            for c in range(n * n):
                cols += [flat[:, c].real, flat[:, c].imag]
        _write_table(args, args.out, header, np.column_stack(cols).tolist())
    summary = {"P1": sim.P1, "inverse_defect": sim.inverse_defect, "liouville_deviation": sim.logdet_check}
    lines = ["P(1) ="]
    lines += ["  " + "  ".join(f"{x.real:+.10f}{x.imag:+.10f}j" for x in row) for row in sim.P1]
    lines += [
        f"max |P P^-1 - I| = {sim.inverse_defect:.3e}",
        f"Liouville deviation = {sim.logdet_check:.3e}",
    ]
    if args.out:
        lines.append(f"wrote {args.out}")
    summary["P1"] = [[complex(x) for x in row] for row in sim.P1]
    _emit(args, summary, lines)
    return EXIT_OK


def cmd_spectrum(pipe: Pipeline, args) -> int:
    res = pipe.spectrum
    es = res.eigenstructure
    if args.out:
        rows = []
        for mode, mu in enumerate_modes(res, args.lmax):
            ev = es.eigenvalues[mode.k - 1]
            rows.append([mode.k, mode.l, mu.real, mu.imag, ev.modulus, ev.theta, ev.algebraic, ev.geometric])
        _write_table(args, args.out, ["k", "l", "Re_mu", "Im_mu", "abs_rho", "theta", "alg_mult", "geom_mult"], rows)
    summary = {
        "classification": str(res.classification.tag),
        "eta1": res.eta1,
        "growth_bound": res.growth_bound,
        "stable": res.stable,
        "rho": [complex(ev.rho) for ev in es.eigenvalues],
        "alg_mult": [ev.algebraic for ev in es.eigenvalues],
        "geom_mult": [ev.geometric for ev in es.eigenvalues],
    }
    lines = [f"{es.n_distinct} distinct boundary eigenvalue(s), eta(1) = {res.eta1:.15g}"]
    for k, ev in enumerate(es.eigenvalues, 1):
        lines.append(
            f"  rho_{k} = {ev.rho.real:+.12g}{ev.rho.imag:+.12g}j  |rho| = {ev.modulus:.12g}"
            f"  alg {ev.algebraic} geom {ev.geometric}"
        )
    lines.append(f"growth bound = {res.growth_bound:.12g}")
    if args.out:
        lines.append(f"wrote {args.out} ({es.n_distinct * (2 * args.lmax + 1)} modes)")
    _emit(args, summary, lines)
    return EXIT_OK


def cmd_stability(pipe: Pipeline, args) -> int:
    cls = pipe.classification
    if not cls.riesz:
        _emit(args, {"classification": str(cls.tag), "growth_bound": None, "stable": None}, [
            f"classification: {cls.tag}",
            "growth bound: not available (operator is not Riesz-spectral)",
        ])
        return EXIT_NOT_RIESZ
    res = pipe.spectrum
    rmax = max(ev.modulus for ev in res.eigenstructure.eigenvalues)
    verdict = "exponentially stable" if res.stable else "not exponentially stable"
    _emit(args, {"classification": str(cls.tag), "growth_bound": res.growth_bound, "max_abs_rho": rmax, "stable": res.stable}, [
        f"classification: {cls.tag}",
        f"growth bound omega0 = {res.growth_bound:.12g}",
        f"max |rho| = {rmax:.12g}",
        f"verdict: {verdict}",
    ])
    return EXIT_OK if res.stable else EXIT_UNSTABLE


def cmd_modes(pipe: Pipeline, args) -> int:
    es = pipe.spectrum.eigenstructure
    geom = pipe.geometry
    k = args.k
    if not 1 <= k <= es.n_distinct:
        raise ConfigError("--k", f"k must lie in 1..{es.n_distinct}")
    if args.j == 1:
        mf = eigenfunction(k, args.l, es, geom, args.chain)
    else:
        ev = es.eigenvalues[k - 1]
        if args.chain >= len(ev.chains):
            raise NoEigenvector(f"rho_{k} has no chain number {args.chain}")
        chain = ev.chains[args.chain]
        if args.j > chain.shape[0]:
            raise IndexOutOfChain(f"--j {args.j} exceeds the chain length {chain.shape[0]}")
        if args.j - 1 > geom.m_max:
            geom = build_geometry(pipe.system, args.grid_n, m_max=args.j - 1)
        omega_end = [geom.omega_at_end(m) for m in range(1, chain.shape[0])]
        om = jordan_omegas(ev.rho, chain, omega_end, es.A_d, es.rank_tol)
        mf = generalized_eigenfunction(k, args.l, args.j, om, es, geom, args.chain)
    zeta = np.linspace(0.0, 1.0, args.grid + 1) if args.grid else geom.grid
    values = mf(zeta) if args.grid else mf.values()
    if args.original:
        # P is only tabulated on the master grid
        if args.grid:
            raise ConfigError("--original", "cannot be combined with --grid")
        values = inverse_transform(pipe.similarity, values)
    if args.out:
        _write_table(args, args.out, *field_table(zeta, values))
    summary = {"k": k, "l": args.l, "j": args.j, "chain": args.chain, "mu": complex(mf.mu), "samples": int(zeta.size),
               "boundary_residual": mf.boundary_residual(es.A_d)}
    _emit(args, summary, [
        f"mode k={k} l={args.l} j={args.j} chain={args.chain}",
        f"  mu = {mf.mu.real:+.15g}{mf.mu.imag:+.15g}j",
        f"  boundary residual = {summary['boundary_residual']:.3e}",
        f"  {zeta.size} samples" + (f" written to {args.out}" if args.out else ""),
    ])
    return EXIT_OK


def cmd_project(pipe: Pipeline, args) -> int:
    es = pipe.spectrum.eigenstructure
    geom = pipe.geometry
    ztilde, source = _initial_state(pipe, args)
    z = transform_state(pipe.similarity, ztilde)
    W = build_weight(es, geom)
    coeffs = project_initial_state(z, es, W, geom, args.lmax)
    if args.out:
        rows = []
        for e in range(coeffs.c.shape[0]):
            k, chain = coeffs.index(e)
            for i, l in enumerate(range(-args.lmax, args.lmax + 1)):
                mu, c = coeffs.mu[e, i], coeffs.c[e, i]
                rows.append([k, chain, l, mu.real, mu.imag, c.real, c.imag])
        _write_table(args, args.out, ["k", "chain", "l", "Re_mu", "Im_mu", "Re_c", "Im_c"], rows)
    energy = float(np.sum(np.abs(coeffs.c) ** 2))
    summary = {"source": source, "lmax": args.lmax, "coefficients": int(coeffs.c.size), "sum_abs_c2": energy,
               "state_norm": state_norm(z, geom)}
    _emit(args, summary, [
        f"initial state: {source}",
        f"  {coeffs.c.size} coefficients (|l| <= {args.lmax})",
        f"  sum |c|^2 = {energy:.12g}",
        *([f"wrote {args.out}"] if args.out else []),
    ])
    return EXIT_OK


def _parse_times(text: str) -> np.ndarray:
    try:
        times = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise ConfigError("--t", f"cannot parse times {text!r}") from None
    if times.size == 0:
        raise ConfigError("--t", "no times given")
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise ConfigError("--t", "times must be finite and nonnegative")
    return times


def cmd_simulate(pipe: Pipeline, args) -> int:
    times = _parse_times(args.t)
    es = pipe.spectrum.eigenstructure
    geom = pipe.geometry
    ztilde, source = _initial_state(pipe, args)
    res = simulate_original(pipe.similarity, es, geom, ztilde, times, args.method, args.lmax)
    if args.out:
        n = pipe.system.n
        zeta = np.tile(geom.grid, times.size)
        tcol = np.repeat(times, geom.grid.size)
        _write_table(args, args.out, *field_table(zeta, res.states.reshape(-1, n), extra=[("t", tcol)]))
    norms = [state_norm(s, geom) for s in res.states]
    summary = {"source": source, "method": res.method, "times": times.tolist(), "state_norms": norms}
    _emit(args, summary, [
        f"initial state: {source}",
        f"method: {res.method}",
        *(f"  t = {t:.6g}: |z| = {nv:.12g}" for t, nv in zip(times, norms)),
        *([f"wrote {args.out}"] if args.out else []),
    ])
    return EXIT_OK


def cmd_hx(args) -> int:
    try:
        hx = HeatExchangerSpec(
            parse_profile_shorthand(args.alpha1, "--alpha1"),
            parse_profile_shorthand(args.alpha2, "--alpha2"),
            parse_profile_shorthand(args.v, "--v"),
            args.kappa,
        )
    except ConfigError:
        raise
    except HypspecError as exc:
        raise ConfigError("hx", str(exc)) from None
    rep = hx_report(hx, args.grid_n)
    if args.report:
        _write_json(args.report, rep.to_dict())
    verdict = "exponentially stable" if rep.stable else "not exponentially stable"
    _emit(args, rep.to_dict(), [
        f"heat exchanger, kappa = {rep.kappa:.12g}",
        f"  lambda1 = {rep.lambda1:.15g}",
        f"  lambda2 = {rep.lambda2:.15g}",
        f"  kappa*  = {rep.kappa_threshold:.15g}",
        f"  growth bound = {rep.growth_bound:.12g} ({verdict})",
        f"  generic vs closed form: eigenvalues {rep.eigenvalue_mismatch:.2e}, P(1) {rep.P1_mismatch:.2e}",
        *([f"wrote {args.report}"] if args.report else []),
    ])
    return EXIT_OK if rep.stable else EXIT_UNSTABLE


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid-n", type=int, default=None,
                        help=f"master grid intervals (default: HYPSPEC_GRID_N or {DEFAULT_GRID_N})")
    common.add_argument("--seed", type=int, default=0, help="seed for random initial data")
    common.add_argument("--singular-tol", type=float, default=None, help="reciprocal-condition threshold")
    common.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL, help="eigenvalue clustering tolerance")
    common.add_argument("--rtol", type=float, default=1e-10, help="relative tolerance of the P integrator")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="artifact format; json also prints the summary as JSON")

    parser = argparse.ArgumentParser(prog="hypspec", description="Spectral analysis of linear hyperbolic transport systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name != "hx":
            p.add_argument("config", help="system config (.json, .yaml)")
        return p

    add("validate", "check a config")
    add("classify", "classify the operator dynamics")
    add("geometry", "travel time and nested integrals").add_argument("--out")
    add("similarity", "fundamental matrix P and its inverse").add_argument("--out")
    p = add("spectrum", "eigenvalue lattice")
    p.add_argument("--lmax", type=_nonneg_int, default=10, help="largest |l| listed")
    p.add_argument("--out")
    add("stability", "growth bound and stability verdict")
    p = add("modes", "one (generalized) eigenfunction of the transformed operator")
    p.add_argument("--k", type=int, default=1, help="distinct boundary eigenvalue, 1-based")
    p.add_argument("--l", type=int, default=0, help="lattice index")
    p.add_argument("--j", type=int, default=1, help="position in the Jordan chain")
    p.add_argument("--chain", type=_nonneg_int, default=0, help="chain number when rho_k has several")
    p.add_argument("--grid", type=_nonneg_int, default=0, help="output intervals (default: master grid)")
    p.add_argument("--original", action="store_true", help="map to original coordinates with P")
    p.add_argument("--out")
    p = add("project", "modal coefficients of an initial state")
    p.add_argument("--init", help="state CSV (zeta, Re_1, Im_1, ...); default: random smooth state")
    p.add_argument("--lmax", type=_nonneg_int, default=64, help="largest |l| kept")
    p.add_argument("--out")
    p = add("simulate", "evolve an initial state")
    p.add_argument("--init", help="state CSV (zeta, Re_1, Im_1, ...); default: random smooth state")
    p.add_argument("--t", required=True, help="comma-separated times")
    p.add_argument("--method", choices=("oracle", "modal"), default="oracle",
                   help="characteristics solution or truncated modal sum")
    p.add_argument("--lmax", type=_nonneg_int, default=64, help="largest |l| of the modal sum")
    p.add_argument("--out")
    p = add("hx", "co-current heat exchanger")
    p.add_argument("--alpha1", required=True, help="const:c, affine:a,b or file:path.csv")
    p.add_argument("--alpha2", required=True, help="same forms as --alpha1")
    p.add_argument("--v", required=True, help="same forms as --alpha1")
    p.add_argument("--kappa", type=float, required=True, help="boundary feedback gain")
    p.add_argument("--report")
    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "geometry": cmd_geometry,
    "similarity": cmd_similarity,
    "spectrum": cmd_spectrum,
    "stability": cmd_stability,
    "modes": cmd_modes,
    "project": cmd_project,
    "simulate": cmd_simulate,
}


def _check_options(args) -> None:
    if args.grid_n is not None and (args.grid_n < 16 or args.grid_n % 2):
        raise ConfigError("--grid-n", "grid size must be even and >= 16")
    if not 1e-14 <= args.rtol <= 1e-4:
        raise ConfigError("--rtol", "must lie in [1e-14, 1e-4]")
    if args.singular_tol is not None and not 0 < args.singular_tol < 1:
        raise ConfigError("--singular-tol", "must lie in (0, 1)")
    if not 0 < args.rank_tol < 1:
        raise ConfigError("--rank-tol", "must lie in (0, 1)")


def run(argv=None) -> int:
    """Run the CLI on ``argv`` and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.grid_n is None:
        try:
            args.grid_n = default_grid_size()
        except ValueError:
            print("error: HYPSPEC_GRID_N is not an integer", file=sys.stderr)
            return EXIT_INVALID
    try:
        _check_options(args)
        if args.command == "hx":
            return cmd_hx(args)
        return _COMMANDS[args.command](Pipeline(args), args)
    except _INVALID as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NotRiesz,) + _NOT_RIESZ as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_RIESZ
    except (NoEigenvector, IndexOutOfChain, NotDiagonalizable) as exc:
        print(f"error: invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _NUMERICAL as exc:
        print(f"error: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except HypspecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FloatingPointError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
