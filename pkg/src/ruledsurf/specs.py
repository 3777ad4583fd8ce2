"""JSON surface specifications and the CSV / OBJ / report writers.

A spec looks like::

    {"invariants": {"builtin": "helicoid", "params": {"delta0": 1}},
     "domain": [0, 6.283], "v_range": [-2, 2], "grid": [64, 16]}

or gives ``"invariants": {"k": ..., "delta": ..., "lambda": ...}`` (or
``"sigma"`` instead of ``"lambda"``), or a raw
``"parametrization": {"directrix": [x, y, z], "direction": [x, y, z]}``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import expressions as ex
from .frames import RawRuledMap, extract_standard_form
from .profiles import BUILTINS, ExpressionProfile, InvariantProfile, InvariantViolation, make_builtin_profile

TOP_LEVEL_KEYS = ("invariants", "parametrization", "domain", "v_range", "grid", "tol")
TOL_KEYS = ("fit", "shape", "corollary", "roundtrip", "oracle")
BUILTIN_PARAMS = {
    "helicoid": ("delta0",),
    "edlinger": ("k0", "delta0"),
    "const_drall_orthoid": ("k", "delta0"),
    "const_drall_conoid": ("lambda", "delta0"),
    "generic": ("k", "delta", "lambda", "sigma"),
}
# analytic pipelines vs pipelines fed by extracted tables
DEFAULT_TOLS = {"fit": 1e-8, "shape": 1e-8, "corollary": 1e-10, "roundtrip": 1e-6, "oracle": 1e-5}
EXTRACTED_TOLS = {"fit": 1e-4, "shape": 1e-4, "corollary": 1e-4, "roundtrip": 1e-6, "oracle": 1e-5}


class SpecError(ValueError):
    """Invalid spec; ``path`` names the offending field (e.g. ``invariants.delta``)."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


@dataclass
class SurfaceSpec:
    invariants: dict | None
    parametrization: dict | None
    domain: tuple
    v_range: tuple = (-2.0, 2.0)
    grid: tuple = (32, 16)
    tol: dict = field(default_factory=dict)
    source: str | None = None

    @property
    def kind(self):
        return "invariants" if self.invariants is not None else "parametrization"

    def tolerances(self):
        base = DEFAULT_TOLS if self.kind == "invariants" else EXTRACTED_TOLS
        return {**base, **self.tol}

    def to_json(self):
        out = {}
        if self.invariants is not None:
            out["invariants"] = self.invariants
        else:
            out["parametrization"] = self.parametrization
        out["domain"] = list(self.domain)
        out["v_range"] = list(self.v_range)
        out["grid"] = list(self.grid)
        if self.tol:
            out["tol"] = dict(self.tol)
        return out


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SpecError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _interval(obj, key, required=True, default=None):
    if key not in obj:
        if required:
            raise SpecError(key, "missing field")
        return default
    val = obj[key]
    if not isinstance(val, list) or len(val) != 2:
        raise SpecError(key, "expected a two-element list [min, max]")
    a, b = _number(val[0], f"{key}[0]"), _number(val[1], f"{key}[1]")
    if not a < b:
        raise SpecError(key, f"empty interval: {a} >= {b}")
    return a, b


def _expression(value, path):
    """Expression string (or number) -> validated text."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return _number(value, path)
    if not isinstance(value, str):
        raise SpecError(path, f"expected an expression string, got {value!r}")
    try:
        ex.parse_expression(value)
    except ex.ExpressionSyntaxError as err:
        raise SpecError(path, f"parse error at offset {err.offset}: {err.args[0]}") from err
    return value


def _check_invariants(inv):
    if not isinstance(inv, dict):
        raise SpecError("invariants", "expected an object")
    if "builtin" in inv:
        unknown = set(inv) - {"builtin", "params"}
        if unknown:
            raise SpecError(f"invariants.{sorted(unknown)[0]}", "not allowed next to 'builtin'")
        name = inv["builtin"]
        if name not in BUILTINS:
            raise SpecError("invariants.builtin", f"unknown surface class {name!r}; expected one of {list(BUILTINS)}")
        params = inv.get("params", {})
        if not isinstance(params, dict):
            raise SpecError("invariants.params", "expected an object")
        allowed = BUILTIN_PARAMS[name]
        for key, val in params.items():
            if key not in allowed:
                raise SpecError(f"invariants.params.{key}", f"unknown parameter for {name}")
            if key in ("delta0", "k0"):
                _number(val, f"invariants.params.{key}")
            else:
                _expression(val, f"invariants.params.{key}")
        required = [p for p in allowed if p not in ("lambda", "sigma")] if name == "generic" else list(allowed)
        for key in required:
            if key not in params:
                raise SpecError(f"invariants.params.{key}", f"missing parameter for {name}")
        if name == "generic" and ("lambda" in params) == ("sigma" in params):
            raise SpecError("invariants.params", "give exactly one of 'lambda' and 'sigma'")
        return
    unknown = set(inv) - {"k", "delta", "lambda", "sigma"}
    if unknown:
        raise SpecError(f"invariants.{sorted(unknown)[0]}", "unknown field")
    for key in ("k", "delta"):
        if key not in inv:
            raise SpecError(f"invariants.{key}", "missing field")
        _expression(inv[key], f"invariants.{key}")
    if ("lambda" in inv) == ("sigma" in inv):
        raise SpecError("invariants.lambda", "give exactly one of 'lambda' and 'sigma'")
    key = "lambda" if "lambda" in inv else "sigma"
    _expression(inv[key], f"invariants.{key}")


def _check_parametrization(par):
    if not isinstance(par, dict):
        raise SpecError("parametrization", "expected an object")
    for key in ("directrix", "direction"):
        if key not in par:
            raise SpecError(f"parametrization.{key}", "missing field")
        comps = par[key]
        if not isinstance(comps, list) or len(comps) != 3:
            raise SpecError(f"parametrization.{key}", "expected a list of three expressions")
        for i, c in enumerate(comps):
            _expression(c, f"parametrization.{key}[{i}]")
    unknown = set(par) - {"directrix", "direction"}
    if unknown:
        raise SpecError(f"parametrization.{sorted(unknown)[0]}", "unknown field")


def parse_spec(obj, source=None) -> SurfaceSpec:
    """Validate a decoded JSON object and build a SurfaceSpec."""
    if not isinstance(obj, dict):
        raise SpecError("", "spec must be a JSON object")
    for key in obj:
        if key not in TOP_LEVEL_KEYS:
            raise SpecError(key, "unknown field")
    has_inv, has_par = "invariants" in obj, "parametrization" in obj
    if has_inv and has_par:
        raise SpecError("parametrization", "give either 'invariants' or 'parametrization', not both")
    if not (has_inv or has_par):
        raise SpecError("invariants", "missing field (or 'parametrization')")
    if has_inv:
        _check_invariants(obj["invariants"])
    else:
        _check_parametrization(obj["parametrization"])
    domain = _interval(obj, "domain")
    v_range = _interval(obj, "v_range", required=False, default=(-2.0, 2.0))
    grid = obj.get("grid", [32, 16])
    if (not isinstance(grid, list) or len(grid) != 2
            or not all(isinstance(n, int) and not isinstance(n, bool) for n in grid)):
        raise SpecError("grid", "expected [nu, nv] integers")
    if grid[0] < 2 or grid[1] < 2:
        raise SpecError("grid", "nu and nv must be at least 2")
    tol = obj.get("tol", {})
    if not isinstance(tol, dict):
        raise SpecError("tol", "expected an object")
    for key, val in tol.items():
        if key not in TOL_KEYS:
            raise SpecError(f"tol.{key}", f"unknown tolerance; expected one of {list(TOL_KEYS)}")
        if _number(val, f"tol.{key}") <= 0:
            raise SpecError(f"tol.{key}", "tolerance must be positive")
    spec = SurfaceSpec(obj.get("invariants"), obj.get("parametrization"), domain, v_range,
                       (grid[0], grid[1]), {k: float(v) for k, v in tol.items()}, source)
    build_profile(spec)  # fail early on torsal or sign-inconsistent input
    return spec


def load_spec(path) -> SurfaceSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise SpecError("", f"cannot read {path}: {err.strerror}") from err
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecError("", f"invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}") from err
    return parse_spec(obj, str(path))


def _profile_arg(value, domain):
    if isinstance(value, str):
        return ExpressionProfile.parse(value)
    return float(value)


def build_profile(spec: SurfaceSpec, extraction_samples=2001) -> InvariantProfile:
    """InvariantProfile for the spec; parametrized specs go through standard-form extraction."""
    try:
        if spec.invariants is not None:
            inv = spec.invariants
            if "builtin" in inv:
                name = inv["builtin"]
                params = dict(inv.get("params", {}))
                if "lambda" in params:
                    params["lam"] = params.pop("lambda")
                params = {k: (_profile_arg(v, spec.domain) if k not in ("delta0", "k0") else v)
                          for k, v in params.items()}
                return make_builtin_profile(name, domain=spec.domain, **params)
            kw = {"lam": _profile_arg(inv["lambda"], spec.domain)} if "lambda" in inv else \
                {"sigma": _profile_arg(inv["sigma"], spec.domain)}
            return InvariantProfile(_profile_arg(inv["k"], spec.domain), _profile_arg(inv["delta"], spec.domain),
                                    domain=spec.domain, name="spec", **kw)
        par = spec.parametrization
        raw = RawRuledMap([_profile_arg(c, spec.domain) for c in par["directrix"]],
                          [_profile_arg(c, spec.domain) for c in par["direction"]], spec.domain)
        profile, _ = extract_standard_form(raw, extraction_samples, name="parametrization")
        return profile
    except InvariantViolation as err:
        field_name = "invariants.delta" if spec.invariants is not None else "parametrization"
        raise SpecError(field_name, str(err)) from err
    except ex.EvaluationError as err:
        raise SpecError(spec.kind, f"expression cannot be evaluated on the domain: {err}") from err
    except ValueError as err:
        if isinstance(err, SpecError):
            raise
        raise SpecError(spec.kind, str(err)) from err


# --- writers -------------------------------------------------------------------

def fmt(x) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    return header, data


def write_obj(path, mesh):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        for x, y, z in mesh.vertices:
            fh.write(f"v {fmt(x)} {fmt(y)} {fmt(z)}\n")
        for face in mesh.faces:
            fh.write("f " + " ".join(str(int(i) + 1) for i in face) + "\n")


def read_obj(path):
    verts, faces = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(i) - 1 for i in parts[1:]])
    return np.array(verts), np.array(faces, dtype=int)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_report(path, report: dict):
    text = json.dumps(_jsonable(report), indent=2, allow_nan=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return text
