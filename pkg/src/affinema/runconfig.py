"""JSON run configurations and atomic artifact writes."""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .convex.boundary import BoundaryData
from .convex.domains import ConvexCone, Disk, Polygon, dual_section
from .errors import ConfigParse, IoError, SchemaViolation
from .solver.config import SolverConfig

COMMANDS = ("cheng-yau", "ck", "ck-singular", "barrier-check", "legendre", "geometry", "foliate", "verify")

_NUM = {"type": "number"}
_EXT = {"anyOf": [{"type": "number"}, {"const": "inf"}]}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

_DOMAIN = {
    "type": "object",
    "minProperties": 1,
    "maxProperties": 1,
    "properties": {
        "disk": {
            "type": "object",
            "properties": {"r": {"type": "number", "exclusiveMinimum": 0}, "center": _POINT},
            "additionalProperties": False,
        },
        "polygon": {
            "type": "object",
            "properties": {"vertices": {"type": "array", "items": _POINT, "minItems": 3}},
            "required": ["vertices"],
            "additionalProperties": False,
        },
        "triangle": {"type": "object", "additionalProperties": False},
        "cone": {
            "type": "object",
            "properties": {"section": {"$ref": "#/$defs/domain"}},
            "required": ["section"],
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"domain": _DOMAIN},
    "type": "object",
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "domain": {"$ref": "#/$defs/domain"},
        "gamma": {"type": "number", "exclusiveMinimum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "lambda": {"type": "number", "exclusiveMinimum": 0},
        "t_grid": {"type": "array", "items": _NUM, "minItems": 2},
        "boundary": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "constant": _NUM,
                "affine": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
                "points": {
                    "type": "array",
                    "items": {"type": "array", "prefixItems": [_NUM, _EXT], "minItems": 2, "maxItems": 2},
                    "minItems": 1,
                },
            },
            "additionalProperties": False,
        },
        "solver": {
            "type": "object",
            "properties": {
                "h": {"type": "number", "exclusiveMinimum": 0},
                "stencil": {"type": "integer"},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "h": {"type": "number", "exclusiveMinimum": 0},
        "input": {"type": "string"},
        "samples": {"type": "integer", "minimum": 1},
        "out_dir": {"type": "string"},
    },
    "not": {"anyOf": [{"required": ["gamma", "alpha"]}, {"required": ["lambda", "t_grid"]}]},
    "additionalProperties": False,
}


@dataclass
class RunConfig:
    """Validated run configuration with both exponents filled in."""

    command: str
    domain: object = None
    gamma: float = 4.0
    alpha: float = 1.0
    lam: float | None = None
    t_grid: list | None = None
    boundary: dict | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    out_dir: str = "."
    raw: dict = field(default_factory=dict)

    def boundary_data(self, domain=None):
        return parse_boundary(self.boundary or {"constant": 0.0}, domain or self.domain)


def gamma_from_alpha(alpha, n=2):
    return (n + 2.0) / alpha


def alpha_from_gamma(gamma, n=2):
    return (n + 2.0) / gamma


def parse_domain(spec):
    """Domain object from its JSON form; a cone yields the section of its dual."""
    if spec is None:
        return Disk((0.0, 0.0), 1.0)
    (kind, body), = spec.items()
    if kind == "disk":
        return Disk(tuple(body.get("center", (0.0, 0.0))), body.get("r", 1.0))
    if kind == "polygon":
        return Polygon(body["vertices"])
    if kind == "triangle":
        return Polygon([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    if kind == "cone":
        return dual_section(ConvexCone(parse_domain(body["section"])))
    raise SchemaViolation(f"unknown domain kind {kind!r}")


def parse_boundary(spec, domain):
    (kind, body), = spec.items()
    if kind == "constant":
        return BoundaryData.constant(domain, float(body))
    if kind == "affine":
        a1, a2, b = (float(v) for v in body)
        return BoundaryData.affine(domain, [a1, a2], b)
    pairs = [(float(s), np.inf if v == "inf" else float(v)) for s, v in body]
    return BoundaryData.from_points(domain, pairs)


def load_config(source) -> RunConfig:
    """Parse and validate a config given as a path, a JSON string or a dict."""
    if isinstance(source, dict):
        raw = source
    else:
        try:
            if isinstance(source, str) and source.lstrip().startswith("{"):
                raw = json.loads(source)
            else:
                with open(source) as fh:
                    raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigParse(str(exc)) from exc
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        if exc.validator == "not":
            raise SchemaViolation("give at most one of gamma/alpha and one of lambda/t_grid") from exc
        where = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaViolation(f"{where or 'config'}: {exc.message}") from exc
    if "alpha" in raw:
        alpha = float(raw["alpha"])
        gamma = gamma_from_alpha(alpha)
        if not gamma > 1:
            raise SchemaViolation("alpha must give gamma = (n+2)/alpha > 1")
    else:
        gamma = float(raw.get("gamma", 4.0))
        alpha = alpha_from_gamma(gamma)
    knobs = dict(raw.get("solver", {}))
    if "h" in raw:
        knobs.setdefault("h", raw["h"])
    try:
        solver = SolverConfig(gamma=gamma, **knobs)
    except ValueError as exc:
        raise SchemaViolation(str(exc)) from exc
    try:
        domain = parse_domain(raw.get("domain"))
    except (ValueError, KeyError) as exc:
        raise SchemaViolation(str(exc)) from exc
    return RunConfig(
        command=raw.get("command", ""),
        domain=domain,
        gamma=gamma,
        alpha=alpha,
        lam=raw.get("lambda"),
        t_grid=raw.get("t_grid"),
        boundary=raw.get("boundary"),
        solver=solver,
        out_dir=raw.get("out_dir", "."),
        raw=raw,
    )


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(folder, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def dump_json(obj):
    """Deterministic JSON: sorted keys, fixed indentation, non-finite floats as strings."""
    def clean(v):
        if isinstance(v, dict):
            return {str(k): clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, (np.floating, float)):
            v = float(v)
            if np.isnan(v):
                return "nan"
            if np.isinf(v):
                return "inf" if v > 0 else "-inf"
            return v
        if isinstance(v, np.integer):
            return int(v)
        if isinstance(v, np.bool_):
            return bool(v)
        if isinstance(v, np.ndarray):
            return clean(v.tolist())
        return v

    return json.dumps(clean(obj), sort_keys=True, indent=2) + "\n"
