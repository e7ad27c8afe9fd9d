"""JSON form of curves, reports and derived constants."""

import datetime
import hashlib
import json
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .curvekit import (
    Concat,
    FrameProduct,
    GeneratorF1,
    GeneratorG,
    GeodesicArc,
    NuK,
    NuTheta,
    Reparam,
    Rotate,
    Sampled,
)
from .errors import InvariantViolation, ParseError, SchemaError, SclError

PROBE_SAMPLES = 64
UNIT_TOL = 1e-10
TANGENT_TOL = 1e-8

_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_rows3 = {"type": "array", "items": _vec3, "minItems": 2}
_ref = {"$ref": "#/$defs/curve"}


def _node(name, props, required):
    return {
        "type": "object",
        "properties": {"node": {"const": name}, **props},
        "required": ["node", *required],
        "additionalProperties": False,
    }


CURVE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$ref": "#/$defs/curve",
    "$defs": {
        "curve": {
            "type": "object",
            "required": ["node"],
            "properties": {
                "node": {
                    "enum": [
                        "nu_theta",
                        "nu_k",
                        "g",
                        "f1",
                        "geodesic_arc",
                        "sampled",
                        "concat",
                        "rotate",
                        "reparam",
                        "frame_product",
                    ]
                }
            },
            "allOf": [
                {"if": {"properties": {"node": {"const": n}}}, "then": {"$ref": f"#/$defs/{n}"}}
                for n in ("nu_theta", "nu_k", "g", "f1", "geodesic_arc", "sampled", "concat", "rotate", "reparam", "frame_product")
            ],
        },
        "nu_theta": _node(
            "nu_theta",
            {
                "theta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": np.pi},
                "laps": {"type": "integer", "minimum": 1},
            },
            ["theta"],
        ),
        "nu_k": _node("nu_k", {"k": {"type": "integer", "minimum": 1}}, ["k"]),
        "g": _node("g", {"s": {"type": "number", "minimum": 0, "maximum": np.pi}}, ["s"]),
        "f1": _node(
            "f1",
            {
                "s1": {"type": "number", "minimum": 0, "maximum": 2 * np.pi},
                "s2": {"type": "number", "minimum": 0, "maximum": np.pi},
            },
            ["s1", "s2"],
        ),
        "geodesic_arc": _node("geodesic_arc", {"p": _vec3, "q": _vec3}, ["p", "q"]),
        "sampled": _node(
            "sampled",
            {
                "n": {"type": "integer", "minimum": 2},
                "periodic": {"type": "boolean"},
                "points": _rows3,
                "d1": _rows3,
                "d2": _rows3,
            },
            ["points", "d1", "d2"],
        ),
        "concat": _node("concat", {"left": _ref, "right": _ref}, ["left", "right"]),
        "rotate": _node(
            "rotate",
            {"q": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}, "inner": _ref},
            ["q", "inner"],
        ),
        "reparam": _node(
            "reparam",
            {
                "knots": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    "minItems": 2,
                },
                "inner": _ref,
            },
            ["knots", "inner"],
        ),
        "frame_product": _node("frame_product", {"base": _ref, "inner": _ref}, ["base", "inner"]),
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(CURVE_SCHEMA)


def _where(path):
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)


def validate_curve_json(data):
    """Raise SchemaError naming the first offending location."""
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        # report the deepest error on the first failing branch
        e = max(errors, key=lambda e: len(e.absolute_path))
        raise SchemaError(f"{_where(e.absolute_path)}: {e.message}")


def curve_from_json(data, path=()):
    """Build a curve from its (already validated) JSON form."""
    node = data["node"]
    try:
        if node == "nu_theta":
            return NuTheta(data["theta"], data.get("laps", 1))
        if node == "nu_k":
            return NuK(data["k"])
        if node == "g":
            return GeneratorG(data["s"])
        if node == "f1":
            return GeneratorF1(data["s1"], data["s2"])
        if node == "geodesic_arc":
            return GeodesicArc(data["p"], data["q"])
        if node == "sampled":
            c = Sampled(data["points"], data["d1"], data["d2"], periodic=data.get("periodic", False))
            if "n" in data and data["n"] != c.n:
                raise SchemaError(f"{_where(path)}.n: {data['n']} does not match {c.n} rows")
            return c
        if node == "concat":
            return Concat(curve_from_json(data["left"], path + ("left",)), curve_from_json(data["right"], path + ("right",)))
        if node == "rotate":
            return Rotate(data["q"], curve_from_json(data["inner"], path + ("inner",)))
        if node == "reparam":
            return Reparam(curve_from_json(data["inner"], path + ("inner",)), data["knots"])
        if node == "frame_product":
            return FrameProduct(curve_from_json(data["base"], path + ("base",)), curve_from_json(data["inner"], path + ("inner",)))
    except SclError as exc:
        if isinstance(exc, (SchemaError, InvariantViolation)):
            raise
        raise InvariantViolation(f"{_where(path)}: {exc}") from exc
    except ValueError as exc:
        raise InvariantViolation(f"{_where(path)}: {exc}") from exc
    raise SchemaError(f"{_where(path)}: unknown node {node!r}")


def probe(curve, n=PROBE_SAMPLES):
    """Check unit norm and tangency on a small grid; raise InvariantViolation."""
    t = np.linspace(0.0, 1.0, n)
    p, v, _ = curve._jet(t)
    bad = np.abs(np.linalg.norm(p, axis=1) - 1.0) > UNIT_TOL
    if bad.any():
        raise InvariantViolation(f"$: |gamma(t)| != 1 at t = {t[bad][0]:.6f}")
    speed = np.maximum(np.linalg.norm(v, axis=1), 1e-300)
    off = np.abs(np.sum(p * v, axis=1)) / speed > TANGENT_TOL
    if off.any():
        raise InvariantViolation(f"$: gamma'(t) not tangent at t = {t[off][0]:.6f}")


def parse_curve(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    validate_curve_json(data)
    curve = curve_from_json(data)
    probe(curve)
    return curve


def load_curve(path):
    return parse_curve(Path(path).read_text())


def canonical(obj):
    """Canonical JSON text: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def dump_curve(curve):
    return canonical(curve.to_json())


def save_curve(curve, path):
    Path(path).write_text(dump_curve(curve))


def digest(obj):
    text = obj if isinstance(obj, str) else canonical(obj)
    return hashlib.sha256(text.encode()).hexdigest()


def to_plain(obj):
    """Convert numpy values (recursively) into JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    return obj


def make_report(command, parameters, results, input_obj=None, derived=None):
    """A run report; everything except ``timestamps`` is deterministic."""
    return {
        "tool_version": __version__,
        "command": command,
        "input_digest": digest(input_obj) if input_obj is not None else None,
        "parameters": to_plain(parameters),
        "results": to_plain(results),
        "derived_constants": to_plain(derived or {}),
        "timestamps": {"created": datetime.datetime.now(datetime.timezone.utc).isoformat()},
    }


def write_json(obj, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(to_plain(obj), sort_keys=True, indent=2) + "\n")


DERIVED_VERSION = 1


def write_derived(values, path):
    """Numerically located constants, kept apart from anything quoted as given."""
    write_json({"version": DERIVED_VERSION, "tool_version": __version__, "derived": values}, path)


def read_derived(path):
    data = json.loads(Path(path).read_text())
    if data.get("version") != DERIVED_VERSION:
        raise SchemaError(f"derived constants version {data.get('version')} != {DERIVED_VERSION}")
    return data["derived"]
