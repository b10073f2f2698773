"""Config parsing and CSV/JSON serialization.

Configs are JSON or YAML mappings with a strict key set.  Complex matrices are
row-major nested lists whose entries are numbers or ``[re, im]`` pairs.  CSV
files use '.' decimals, 17 significant digits and paired ``Re_``/``Im_``
columns for complex data.  All writers replace their target atomically.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .systems import CoefficientProfile, HypspecError, MatrixProfile, SystemSpec

__all__ = [
    "ConfigError",
    "matrix_to_pairs",
    "parse_matrix",
    "parse_profile",
    "parse_profile_shorthand",
    "load_config",
    "spec_from_mapping",
    "spec_to_mapping",
    "fmt",
    "atomic_write_text",
    "write_csv",
    "read_csv",
    "field_columns",
    "field_table",
    "write_field_csv",
    "write_json_table",
    "read_field_csv",
]

SYSTEM_KEYS = {"n", "lambda0", "M", "K", "L", "singular_tol"}
HX_KEYS = {"alpha1", "alpha2", "v", "kappa"}


class ConfigError(HypspecError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def matrix_to_pairs(mat) -> list:
    mat = np.asarray(mat, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in mat]


def _entry(x, key):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(y, (int, float)) for y in x):
        return complex(x[0], x[1])
    raise ConfigError(key, f"matrix entry {x!r} is neither a number nor an [re, im] pair")


def parse_matrix(value, n: int, key: str) -> np.ndarray:
    """Parse an n x n complex matrix given as nested rows or a flat row-major list."""
    if not isinstance(value, (list, tuple)):
        raise ConfigError(key, "expected a list")
    if len(value) == n and all(isinstance(r, (list, tuple)) and len(r) == n for r in value):
        return np.array([[_entry(x, key) for x in row] for row in value], dtype=complex)
    if len(value) == n * n:
        return np.array([_entry(x, key) for x in value], dtype=complex).reshape(n, n)
    raise ConfigError(key, f"expected an {n}x{n} matrix")


def _number(value, key) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def _strict(mapping: dict, allowed: set, key: str) -> None:
    extra = set(mapping) - allowed
    if extra:
        raise ConfigError(key, f"unknown keys {sorted(extra)}")


def parse_profile(value, key: str) -> CoefficientProfile:
    """Coefficient profile from a mapping, a number, or a ``kind:args`` string."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return CoefficientProfile.constant(value)
    if isinstance(value, str):
        return parse_profile_shorthand(value, key)
    if not isinstance(value, dict) or "kind" not in value:
        raise ConfigError(key, "expected a mapping with a 'kind'")
    kind = value["kind"]
    try:
        if kind == "constant":
            _strict(value, {"kind", "value"}, key)
            return CoefficientProfile.constant(_number(value["value"], f"{key}.value"))
        if kind == "affine":
            _strict(value, {"kind", "a", "b"}, key)
            return CoefficientProfile.affine(_number(value["a"], f"{key}.a"), _number(value["b"], f"{key}.b"))
        if kind == "sampled-grid":
            _strict(value, {"kind", "nodes", "values"}, key)
            return CoefficientProfile.sampled(value["nodes"], value["values"])
    except KeyError as exc:
        raise ConfigError(key, f"missing field {exc.args[0]!r}") from None
    except HypspecError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, str(exc)) from None
    raise ConfigError(key, f"unknown kind {kind!r}")


def parse_profile_shorthand(text: str, key: str = "profile") -> CoefficientProfile:
    """``const:c``, ``affine:a,b`` or ``file:path.csv`` (columns zeta, value)."""
    kind, _, args = text.partition(":")
    try:
        if kind in ("const", "constant"):
            return CoefficientProfile.constant(float(args))
        if kind == "affine":
            a, b = (float(x) for x in args.split(","))
            return CoefficientProfile.affine(a, b)
        if kind == "file":
            _, data = read_csv(args)
            return CoefficientProfile.sampled(data[:, 0].real, data[:, 1].real)
    except (ValueError, OSError) as exc:
        raise ConfigError(key, f"bad profile {text!r}: {exc}") from None
    except HypspecError as exc:
        raise ConfigError(key, str(exc)) from None
    raise ConfigError(key, f"unknown profile kind in {text!r}")


def _parse_M(value, n: int) -> MatrixProfile:
    if value is None:
        return MatrixProfile.zeros(n)
    if isinstance(value, list):
        return MatrixProfile.constant(parse_matrix(value, n, "M"))
    if not isinstance(value, dict) or "kind" not in value:
        raise ConfigError("M", "expected a mapping with a 'kind'")
    kind = value["kind"]
    if kind == "constant":
        _strict(value, {"kind", "entries"}, "M")
        return MatrixProfile.constant(parse_matrix(value.get("entries"), n, "M.entries"))
    if kind == "sampled-grid":
        _strict(value, {"kind", "nodes", "entries"}, "M")
        nodes = value.get("nodes")
        entries = value.get("entries")
        if not isinstance(entries, list) or not isinstance(nodes, list) or len(entries) != len(nodes):
            raise ConfigError("M", "sampled-grid needs one entries matrix per node")
        mats = [parse_matrix(e, n, f"M.entries[{i}]") for i, e in enumerate(entries)]
        try:
            return MatrixProfile.sampled(nodes, mats)
        except HypspecError as exc:
            raise ConfigError("M.nodes", str(exc)) from None
    raise ConfigError("M", f"unknown kind {kind!r}")


def spec_from_mapping(cfg: dict):
    """Build ``(SystemSpec, singular_tol or None)`` from a parsed config.

    A config holding a single ``heat_exchanger`` mapping describes the built-in
    exchanger model instead.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a mapping")
    if "heat_exchanger" in cfg:
        from .heat_exchanger import HeatExchangerSpec, hx_to_system

        _strict(cfg, {"heat_exchanger", "singular_tol"}, "<root>")
        hx = cfg["heat_exchanger"]
        if not isinstance(hx, dict):
            raise ConfigError("heat_exchanger", "expected a mapping")
        _strict(hx, HX_KEYS, "heat_exchanger")
        for k in sorted(HX_KEYS):
            if k not in hx:
                raise ConfigError(f"heat_exchanger.{k}", "missing")
        try:
            spec = HeatExchangerSpec(
                parse_profile(hx["alpha1"], "heat_exchanger.alpha1"),
                parse_profile(hx["alpha2"], "heat_exchanger.alpha2"),
                parse_profile(hx["v"], "heat_exchanger.v"),
                _number(hx["kappa"], "heat_exchanger.kappa"),
            )
        except ConfigError:
            raise
        except HypspecError as exc:
            raise ConfigError("heat_exchanger", str(exc)) from None
        tol = cfg.get("singular_tol")
        return hx_to_system(spec), (None if tol is None else _number(tol, "singular_tol"))
    _strict(cfg, SYSTEM_KEYS, "<root>")
    for k in ("n", "lambda0", "K", "L"):
        if k not in cfg:
            raise ConfigError(k, "missing")
    n = cfg["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigError("n", f"expected a positive integer, got {n!r}")
    lam = parse_profile(cfg["lambda0"], "lambda0")
    M = _parse_M(cfg.get("M"), n)
    K = parse_matrix(cfg["K"], n, "K")
    L = parse_matrix(cfg["L"], n, "L")
    tol = cfg.get("singular_tol")
    return SystemSpec.build(lam, K, L, M), (None if tol is None else _number(tol, "singular_tol"))


def spec_to_mapping(spec: SystemSpec, singular_tol: float | None = None) -> dict:
    out = {
        "n": spec.n,
        "lambda0": spec.lambda0.to_dict(),
        "M": spec.M.to_dict(),
        "K": matrix_to_pairs(spec.K),
        "L": matrix_to_pairs(spec.L),
    }
    if singular_tol is not None:
        out["singular_tol"] = singular_tol
    return out


def load_config(path):
    """Read a JSON or YAML config file and build the system it describes."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            import yaml

            cfg = yaml.safe_load(text)
        else:
            cfg = json.loads(text)
    except Exception as exc:  # parser-specific exception types
        raise ConfigError("<file>", f"cannot parse {path.name}: {exc}") from None
    return spec_from_mapping(cfg)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> None:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else fmt(v)) for v in row])
    atomic_write_text(path, buf.getvalue())


def read_csv(path):
    """Header and a float array of the body."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def field_columns(n: int) -> list:
    cols = []
    for i in range(n):
        cols += [f"Re_{i + 1}", f"Im_{i + 1}"]
    return cols


def _pairs(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    out = np.empty(values.shape[:-1] + (2 * values.shape[-1],))
    out[..., 0::2] = values.real
    out[..., 1::2] = values.imag
    return out


def field_table(zeta, values, extra=None):
    """Header and rows ``[extra...], zeta, Re_1, Im_1, ...`` for a field ``values[node, comp]``.

    ``extra`` is a list of ``(name, column)`` prepended to the table.
    """
    values = np.asarray(values)
    zeta = np.asarray(zeta, dtype=float)
    extra = extra or []
    header = [name for name, _ in extra] + ["zeta"] + field_columns(values.shape[-1])
    body = np.column_stack([np.asarray(col, dtype=float) for _, col in extra] + [zeta, _pairs(values)])
    return header, body.tolist()


def write_field_csv(path, zeta, values, extra=None) -> None:
    write_csv(path, *field_table(zeta, values, extra))


def write_json_table(path, header, rows) -> None:
    """Table as ``{"columns": [...], "rows": [[...], ...]}``."""
    payload = {"columns": list(header), "rows": [[v if isinstance(v, (int, np.integer, str)) else float(v) for v in r] for r in rows]}
    atomic_write_text(path, json.dumps(payload, default=lambda x: x.item()) + "\n")


def read_field_csv(path):
    """Inverse of :func:`write_field_csv` without extras: ``(zeta, values)``."""
    header, data = read_csv(path)
    if header[0] != "zeta" or (len(header) - 1) % 2:
        raise ConfigError(str(path), "expected columns zeta, Re_1, Im_1, ...")
    return data[:, 0], data[:, 1::2] + 1j * data[:, 2::2]
