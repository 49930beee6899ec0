"""
JSON schema for okbodies: varieties, surfaces, divisors, flags and polytopes.

Every rational is written as a string "p/q" (or "p"); every parse failure is a
SchemaError naming the offending field. See docs/schema.md.

Usage:
    from jsonio import load_documents, parse_model, parse_divisor, polytope_to_json

    doc = load_documents(["p2.json", "divisor.json"])
    X = parse_model(doc)
    D = parse_divisor(X, doc["divisor"])
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from errors import SchemaError
from exactgeom import Halfspace, Polytope, QVector, fmt_q, from_halfspaces, hull, q
from oracle import GeneralCurveFlag, SampleConfig
from surface import LatticeSurface, SurfFlag
from toric import InvariantFlag, ToricDivisor, ToricVariety

Model = Union[ToricVariety, LatticeSurface]
Flag = Union[InvariantFlag, SurfFlag, GeneralCurveFlag]

# ---------------------- Utilities ----------------------

def _rational(x: Any, where: str) -> Fraction:
    if isinstance(x, float):
        raise SchemaError(f"{where}: floats are not accepted, write {x!r} as a \"p/q\" string")
    try:
        return q(x)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise SchemaError(f"{where}: not a rational: {x!r}") from e


def _rationals(xs: Any, where: str) -> QVector:
    if not isinstance(xs, list):
        raise SchemaError(f"{where}: expected an array, got {type(xs).__name__}")
    return tuple(_rational(x, f"{where}[{i}]") for i, x in enumerate(xs))


def _integers(xs: Any, where: str) -> Tuple[int, ...]:
    values = _rationals(xs, where)
    if any(v.denominator != 1 for v in values):
        raise SchemaError(f"{where}: expected integers")
    return tuple(int(v) for v in values)


def _require(obj: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def load_json(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse one JSON object from a file."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise SchemaError(f"{path}: no such file") from e
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from e
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: top level must be an object")
    return data


def load_documents(paths: Iterable[Union[str, Path]]) -> Dict[str, Any]:
    """Merge several input files; later files override earlier top-level keys."""
    merged: Dict[str, Any] = {}
    for path in paths:
        doc = load_json(path)
        if "type" in doc:
            doc = {"model": doc}
        merged.update(doc)
    return merged


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"

# ---------------------- Models ----------------------

def parse_toric(obj: Mapping[str, Any], name: str = "") -> ToricVariety:
    rays = _require(obj, "rays", "variety")
    cones = _require(obj, "max_cones", "variety")
    if not isinstance(rays, list) or not isinstance(cones, list):
        raise SchemaError("variety: rays and max_cones must be arrays")
    return ToricVariety.from_data(
        [_integers(r, f"variety.rays[{i}]") for i, r in enumerate(rays)],
        [_integers(c, f"variety.max_cones[{i}]") for i, c in enumerate(cones)],
        name=str(obj.get("name", name)),
    )


def parse_surface(obj: Mapping[str, Any], name: str = "") -> LatticeSurface:
    rank = _require(obj, "rank", "surface")
    if isinstance(rank, bool) or not isinstance(rank, int):
        raise SchemaError("surface.rank: expected an integer")
    form = [_rationals(row, f"surface.Q[{i}]") for i, row in enumerate(_require(obj, "Q", "surface"))]
    curves = []
    for i, c in enumerate(_require(obj, "curves", "surface")):
        curves.append((str(_require(c, "name", f"surface.curves[{i}]")),
                       _rationals(_require(c, "class", f"surface.curves[{i}]"), f"surface.curves[{i}].class")))
    generators = [_rationals(g, f"surface.effective_generators[{i}]")
                  for i, g in enumerate(_require(obj, "effective_generators", "surface"))]
    fibrations = [_rationals(_require(f, "F", f"surface.fibrations[{i}]"), f"surface.fibrations[{i}].F")
                  for i, f in enumerate(obj.get("fibrations", []))]
    ample = obj.get("ample")
    return LatticeSurface.from_data(
        rank, form, curves, generators, fibrations,
        abundant=bool(obj.get("abundant", False)),
        ample=_rationals(ample, "surface.ample") if ample is not None else None,
        name=str(obj.get("name", name)),
    )


def parse_model(doc: Mapping[str, Any]) -> Model:
    """The toric variety or surface of a document (top level or under "model")."""
    obj = doc.get("model", doc)
    if not isinstance(obj, Mapping):
        raise SchemaError("model: expected an object")
    kind = obj.get("type")
    if kind == "toric":
        return parse_toric(obj)
    if kind == "surface":
        return parse_surface(obj)
    raise SchemaError(f"model.type: expected \"toric\" or \"surface\", got {kind!r}")

# ---------------------- Divisors and flags ----------------------

def parse_divisor(model: Model, raw: Any) -> Union[ToricDivisor, QVector]:
    """{"coeffs": [...]} on a toric variety, {"class": [...]} on a surface; a bare array for either."""
    if isinstance(raw, Mapping):
        raw = raw.get("coeffs", raw.get("class"))
    values = _rationals(raw, "divisor")
    if isinstance(model, ToricVariety):
        if len(values) != model.n_rays:
            raise SchemaError(f"divisor: {len(values)} coefficients for {model.n_rays} rays")
        return ToricDivisor(values)
    if len(values) != model.rank:
        raise SchemaError(f"divisor: class of length {len(values)} on a rank {model.rank} lattice")
    return values


def parse_flag(model: Model, raw: Any) -> Flag:
    """{"cone": [...]}, {"curve": name, "point": "general"} or {"ray": i, "point": "general"}."""
    if isinstance(raw, list):
        raw = {"cone": raw}
    elif isinstance(raw, str):
        raw = {"curve": raw}
    if not isinstance(raw, Mapping):
        raise SchemaError("flag: expected an object")
    if "cone" in raw:
        if not isinstance(model, ToricVariety):
            raise SchemaError("flag.cone: invariant flags need a toric variety")
        return InvariantFlag(_integers(raw["cone"], "flag.cone"))
    point = str(raw.get("point", "general"))
    if point != "general":
        raise SchemaError(f"flag.point: only \"general\" is supported, got {point!r}")
    if "curve" in raw:
        if not isinstance(model, LatticeSurface):
            raise SchemaError("flag.curve: curve flags need a surface model")
        return SurfFlag(str(raw["curve"]))
    if "ray" in raw:
        if not isinstance(model, ToricVariety):
            raise SchemaError("flag.ray: general-point flags on rays need a toric surface")
        x0 = raw.get("x0")
        return GeneralCurveFlag(int(_rational(raw["ray"], "flag.ray")),
                                _rational(x0, "flag.x0") if x0 is not None else None)
    raise SchemaError("flag: expected one of \"cone\", \"curve\" or \"ray\"")


def parse_flag_option(model: Model, text: str) -> Flag:
    """--flag: JSON, a comma-separated cone, or a curve name."""
    text = text.strip()
    if text.startswith(("{", "[")):
        try:
            return parse_flag(model, json.loads(text))
        except json.JSONDecodeError as e:
            raise SchemaError(f"--flag: invalid JSON ({e.msg})") from e
    if isinstance(model, ToricVariety):
        try:
            return InvariantFlag(tuple(int(x) for x in text.split(",")))
        except ValueError as e:
            raise SchemaError(f"--flag: expected ray indices, got {text!r}") from e
    return SurfFlag(text)


def parse_schedule(text: str) -> Tuple[Fraction, ...]:
    """Comma-separated rationals, strictly decreasing and positive."""
    values = tuple(_rational(x, "--epsilon-schedule") for x in text.split(",") if x.strip())
    if len(values) < 4:
        raise SchemaError("--epsilon-schedule: at least 4 values are needed")
    if any(v <= 0 for v in values) or any(a <= b for a, b in zip(values, values[1:])):
        raise SchemaError("--epsilon-schedule: values must be positive and strictly decreasing")
    return values


def parse_sample_config(raw: Optional[Mapping[str, Any]], seed: Optional[int] = None) -> SampleConfig:
    data = dict(raw or {})
    if seed is not None:
        data["seed"] = seed
    try:
        return SampleConfig.from_json(data)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"sample: {e}") from e

# ---------------------- Polytopes ----------------------

def polytope_to_json(p: Polytope) -> Dict[str, Any]:
    return {
        "ambient_dim": p.ambient_dim,
        "dim": p.affine_dim,
        "vertices": [[fmt_q(x) for x in v] for v in p.vertices],
        "halfspaces": [{"normal": [fmt_q(x) for x in h.normal], "offset": fmt_q(h.offset)} for h in p.halfspaces],
    }


def polytope_from_json(obj: Mapping[str, Any]) -> Polytope:
    vertices: List[QVector] = [_rationals(v, f"vertices[{i}]") for i, v in enumerate(obj.get("vertices", []))]
    n = obj.get("ambient_dim")
    if vertices:
        return hull(vertices, n)
    halfspaces: Sequence[Mapping[str, Any]] = obj.get("halfspaces", [])
    if not halfspaces:
        raise SchemaError("polytope: needs vertices or halfspaces")
    return from_halfspaces(
        [Halfspace(_rationals(h["normal"], "halfspaces.normal"), _rational(h["offset"], "halfspaces.offset"))
         for h in halfspaces],
        n,
    )
