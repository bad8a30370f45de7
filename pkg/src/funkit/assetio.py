"""Bit-exact parsing and serialization of assets, geometry, masks, and traces.

The asset document format is a strict JSON subset with a single canonical
serialization: fixed key order, two-space indentation, numeric vectors inline,
reals printed in shortest round-trip form (integral values as integers), and a
trailing newline. Parsing rejects unknown keys, duplicate keys, and the
non-standard constants some JSON readers tolerate. All numeric fields are
64-bit reals.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import DocumentSyntaxError, FileFormatError, SchemaError
from .ir import (EFFECT_KINDS, GEOMETRY_FORMATS, JOINT_TYPES, MAPPING_KINDS,
                 PART_ROLES, BinaryMapping, CumulativeMapping, FluidEffect,
                 FunctionTemplate, GeometryEffect, GeometryRef,
                 IlluminationEffect, InteractiveObjectAsset, JointSpec,
                 LinearMapping, Part, PartGeometry, StateSpace, StepMapping,
                 TemperatureEffect)
from .runtime import ActuationTrace, StateTrace

TRACE_HEADER = "t,receptor_state"
STATE_TRACE_HEADER = "t,receptor_state,effector_state"

MASK_FORMATS = ("pgm", "rle-json")

_POINTCLOUD_SUFFIXES = {".xyz": "xyz", ".ply": "ply-ascii", ".obj": "obj"}
_MASK_SUFFIXES = {".pgm": "pgm", ".json": "rle-json"}


def format_real(value) -> str:
    """Shortest decimal form that round-trips; integral values print as integers."""
    f = float(value)
    if not math.isfinite(f):
        raise ValueError("cannot format a non-finite real")
    if f.is_integer() and abs(f) < 1e16:
        return str(int(f))
    return repr(f)


# ---------------------------------------------------------------------------
# canonical JSON writing

def _write_value(value, indent: int, out: list[str]):
    pad = "  " * indent
    if isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, (int, float)):
        out.append(format_real(value))
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        items = list(value.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + "  " + json.dumps(k) + ": ")
            _write_value(v, indent + 1, out)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        if all(isinstance(v, (str, int, float, bool)) for v in value):
            out.append("[" + ", ".join(
                json.dumps(v) if isinstance(v, str)
                else ("true" if v else "false") if isinstance(v, bool)
                else format_real(v) for v in value) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(value):
            out.append(pad + "  ")
            _write_value(v, indent + 1, out)
            out.append(",\n" if i + 1 < len(value) else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def _render_document(tree: dict) -> str:
    out: list[str] = []
    _write_value(tree, 0, out)
    return "".join(out) + "\n"


# ---------------------------------------------------------------------------
# strict JSON reading

def _reject_constant(name):
    raise DocumentSyntaxError(f"non-standard constant {name!r} is not allowed")


def _pairs_hook(pairs):
    obj = {}
    for k, v in pairs:
        if k in obj:
            raise DocumentSyntaxError(f"duplicate key {k!r}")
        obj[k] = v
    return obj


def _loads_strict(text: str) -> dict:
    try:
        tree = json.loads(text, parse_int=float, parse_constant=_reject_constant,
                          object_pairs_hook=_pairs_hook)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(e.msg, e.lineno, e.colno) from None
    if not isinstance(tree, dict):
        raise SchemaError("document root must be an object")
    return tree


def _no_extras(obj: dict, allowed, path: str):
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"unknown key {key!r} in {path}")


def _need(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"missing required key {key!r} in {path}")
    return obj[key]


def _as_object(v, path: str) -> dict:
    if not isinstance(v, dict):
        raise SchemaError(f"{path} must be an object")
    return v


def _as_str(v, path: str, choices=None) -> str:
    if not isinstance(v, str):
        raise SchemaError(f"{path} must be a string")
    if choices is not None and v not in choices:
        raise SchemaError(f"{path} must be one of {', '.join(choices)}; got {v!r}")
    return v


def _as_real(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, float):
        raise SchemaError(f"{path} must be a number")
    return v


def _as_vec3(v, path: str) -> tuple[float, float, float]:
    if not isinstance(v, list) or len(v) != 3:
        raise SchemaError(f"{path} must be a 3-element numeric array")
    return tuple(_as_real(c, path) for c in v)


def _as_pair(v, path: str) -> tuple[float, float]:
    if not isinstance(v, list) or len(v) != 2:
        raise SchemaError(f"{path} must be a 2-element numeric array")
    return tuple(_as_real(c, path) for c in v)


# ---------------------------------------------------------------------------
# asset documents

def _joint_to_tree(j: JointSpec) -> dict:
    tree = {"type": j.joint_type, "axis": list(j.axis)}
    if j.origin is not None:
        tree["origin"] = list(j.origin)
    if j.range is not None:
        tree["range"] = list(j.range)
    return tree


def _joint_from_tree(node, path: str) -> JointSpec:
    obj = _as_object(node, path)
    _no_extras(obj, ("type", "axis", "origin", "range"), path)
    jtype = _as_str(_need(obj, "type", path), path + ".type", JOINT_TYPES)
    axis = _as_vec3(_need(obj, "axis", path), path + ".axis")
    origin = _as_vec3(obj["origin"], path + ".origin") if "origin" in obj else None
    rng = _as_pair(obj["range"], path + ".range") if "range" in obj else None
    return JointSpec(joint_type=jtype, axis=axis, origin=origin, range=rng)


def _space_to_tree(s: StateSpace) -> dict:
    if s.is_discrete:
        return {"kind": "discrete", "labels": list(s.labels or ())}
    return {"kind": "continuous", "min": s.min, "max": s.max, "unit": s.unit}


def _space_from_tree(node, path: str) -> StateSpace:
    obj = _as_object(node, path)
    kind = _as_str(_need(obj, "kind", path), path + ".kind", ("discrete", "continuous"))
    if kind == "discrete":
        _no_extras(obj, ("kind", "labels"), path)
        labels = _need(obj, "labels", path)
        if not isinstance(labels, list):
            raise SchemaError(f"{path}.labels must be an array of strings")
        return StateSpace.discrete(*(_as_str(x, path + ".labels") for x in labels))
    _no_extras(obj, ("kind", "min", "max", "unit"), path)
    return StateSpace.continuous(_as_real(_need(obj, "min", path), path + ".min"),
                                 _as_real(_need(obj, "max", path), path + ".max"),
                                 _as_str(_need(obj, "unit", path), path + ".unit"))


def _mapping_to_tree(m) -> dict:
    if isinstance(m, BinaryMapping):
        params = {"on_value": m.on_value, "off_value": m.off_value}
    elif isinstance(m, StepMapping):
        params = {}
        if m.threshold is not None:
            params["threshold"] = m.threshold
        params["low_value"] = m.low_value
        params["high_value"] = m.high_value
    elif isinstance(m, LinearMapping):
        params = {}
        if m.slope is not None:
            params["slope"] = m.slope
        if m.offset is not None:
            params["offset"] = m.offset
    elif isinstance(m, CumulativeMapping):
        params = {"delta": m.delta, "initial": m.initial,
                  "clamp_min": m.clamp_min, "clamp_max": m.clamp_max}
    else:
        raise TypeError(f"unknown mapping type {type(m).__name__}")
    return {"type": m.kind, "params": params}


def _mapping_from_tree(node, path: str):
    obj = _as_object(node, path)
    _no_extras(obj, ("type", "params"), path)
    mtype = _as_str(_need(obj, "type", path), path + ".type", MAPPING_KINDS)
    params = _as_object(_need(obj, "params", path), path + ".params")
    p = path + ".params"
    if mtype == "binary":
        _no_extras(params, ("on_value", "off_value"), p)
        return BinaryMapping(on_value=_as_real(_need(params, "on_value", p), p + ".on_value"),
                             off_value=_as_real(_need(params, "off_value", p), p + ".off_value"))
    if mtype == "step":
        _no_extras(params, ("threshold", "low_value", "high_value"), p)
        threshold = _as_real(params["threshold"], p + ".threshold") if "threshold" in params else None
        return StepMapping(low_value=_as_real(_need(params, "low_value", p), p + ".low_value"),
                           high_value=_as_real(_need(params, "high_value", p), p + ".high_value"),
                           threshold=threshold)
    if mtype == "linear":
        _no_extras(params, ("slope", "offset"), p)
        slope = _as_real(params["slope"], p + ".slope") if "slope" in params else None
        offset = _as_real(params["offset"], p + ".offset") if "offset" in params else None
        return LinearMapping(slope=slope, offset=offset)
    _no_extras(params, ("delta", "initial", "clamp_min", "clamp_max"), p)
    return CumulativeMapping(delta=_as_real(_need(params, "delta", p), p + ".delta"),
                             initial=_as_real(_need(params, "initial", p), p + ".initial"),
                             clamp_min=_as_real(_need(params, "clamp_min", p), p + ".clamp_min"),
                             clamp_max=_as_real(_need(params, "clamp_max", p), p + ".clamp_max"))


def _effect_to_tree(e) -> dict:
    if isinstance(e, GeometryEffect):
        params = {"target_joint": e.target_joint}
    elif isinstance(e, IlluminationEffect):
        params = {}
        if e.source_position is not None:
            params["source_position"] = list(e.source_position)
        params["intensity_range"] = list(e.intensity_range)
    elif isinstance(e, TemperatureEffect):
        params = {}
        if e.heat_source_position is not None:
            params["heat_source_position"] = list(e.heat_source_position)
        params["temp_range"] = list(e.temp_range)
    elif isinstance(e, FluidEffect):
        params = {"emitter_position": list(e.emitter_position),
                  "droplet_size_range": list(e.droplet_size_range)}
    else:
        raise TypeError(f"unknown effect type {type(e).__name__}")
    return {"type": e.kind, "params": params}


def _effect_from_tree(node, path: str):
    obj = _as_object(node, path)
    _no_extras(obj, ("type", "params"), path)
    etype = _as_str(_need(obj, "type", path), path + ".type", EFFECT_KINDS)
    params = _as_object(_need(obj, "params", path), path + ".params")
    p = path + ".params"
    if etype == "geometry":
        _no_extras(params, ("target_joint",), p)
        return GeometryEffect(target_joint=_as_str(_need(params, "target_joint", p),
                                                   p + ".target_joint"))
    if etype == "illumination":
        _no_extras(params, ("source_position", "intensity_range"), p)
        pos = (_as_vec3(params["source_position"], p + ".source_position")
               if "source_position" in params else None)
        return IlluminationEffect(
            intensity_range=_as_pair(_need(params, "intensity_range", p), p + ".intensity_range"),
            source_position=pos)
    if etype == "temperature":
        _no_extras(params, ("heat_source_position", "temp_range"), p)
        pos = (_as_vec3(params["heat_source_position"], p + ".heat_source_position")
               if "heat_source_position" in params else None)
        return TemperatureEffect(
            temp_range=_as_pair(_need(params, "temp_range", p), p + ".temp_range"),
            heat_source_position=pos)
    _no_extras(params, ("emitter_position", "droplet_size_range"), p)
    return FluidEffect(
        emitter_position=_as_vec3(_need(params, "emitter_position", p), p + ".emitter_position"),
        droplet_size_range=_as_pair(_need(params, "droplet_size_range", p),
                                    p + ".droplet_size_range"))


def _asset_to_tree(asset: InteractiveObjectAsset) -> dict:
    parts = []
    for part in asset.parts:
        parts.append({
            "id": part.id,
            "role": part.role,
            "geometry": {"file": part.geometry.file, "format": part.geometry.format},
            "joint": _joint_to_tree(part.joint),
        })
    tpl = asset.template
    return {
        "format_version": asset.format_version,
        "object_id": asset.object_id,
        "parts": parts,
        "function_template": {
            "receptor": tpl.receptor_id,
            "effector": tpl.effector_id,
            "receptor_space": _space_to_tree(tpl.receptor_space),
            "effector_space": _space_to_tree(tpl.effector_space),
            "mapping": _mapping_to_tree(tpl.mapping),
            "effect": _effect_to_tree(tpl.effect),
        },
        "metadata": {k: v for k, v in sorted(asset.metadata)},
    }


def parse_asset(text: str) -> InteractiveObjectAsset:
    """Parse an asset document; syntax and schema errors raise, semantics do not.

    The returned asset is structurally complete but not yet validated;
    semantic rules (role counts, range ordering, mapping admissibility) are
    the province of ``ir.validate_asset``.
    """
    tree = _loads_strict(text)
    _no_extras(tree, ("format_version", "object_id", "parts", "function_template", "metadata"),
               "document")
    version = _as_str(_need(tree, "format_version", "document"), "format_version")
    object_id = _as_str(_need(tree, "object_id", "document"), "object_id")
    raw_parts = _need(tree, "parts", "document")
    if not isinstance(raw_parts, list):
        raise SchemaError("parts must be an array")
    parts = []
    for i, node in enumerate(raw_parts):
        path = f"parts[{i}]"
        obj = _as_object(node, path)
        _no_extras(obj, ("id", "role", "geometry", "joint"), path)
        geo = _as_object(_need(obj, "geometry", path), path + ".geometry")
        _no_extras(geo, ("file", "format"), path + ".geometry")
        parts.append(Part(
            id=_as_str(_need(obj, "id", path), path + ".id"),
            role=_as_str(_need(obj, "role", path), path + ".role", PART_ROLES),
            geometry=GeometryRef(
                file=_as_str(_need(geo, "file", path), path + ".geometry.file"),
                format=_as_str(_need(geo, "format", path), path + ".geometry.format",
                               GEOMETRY_FORMATS)),
            joint=_joint_from_tree(_need(obj, "joint", path), path + ".joint")))

    tnode = _as_object(_need(tree, "function_template", "document"), "function_template")
    _no_extras(tnode, ("receptor", "effector", "receptor_space", "effector_space",
                       "mapping", "effect"), "function_template")
    template = FunctionTemplate(
        receptor_id=_as_str(_need(tnode, "receptor", "function_template"),
                            "function_template.receptor"),
        effector_id=_as_str(_need(tnode, "effector", "function_template"),
                            "function_template.effector"),
        receptor_space=_space_from_tree(_need(tnode, "receptor_space", "function_template"),
                                        "function_template.receptor_space"),
        effector_space=_space_from_tree(_need(tnode, "effector_space", "function_template"),
                                        "function_template.effector_space"),
        mapping=_mapping_from_tree(_need(tnode, "mapping", "function_template"),
                                   "function_template.mapping"),
        effect=_effect_from_tree(_need(tnode, "effect", "function_template"),
                                 "function_template.effect"))

    metadata: tuple[tuple[str, str], ...] = ()
    if "metadata" in tree:
        mnode = _as_object(tree["metadata"], "metadata")
        for k, v in mnode.items():
            if not isinstance(v, str):
                raise SchemaError(f"metadata.{k} must be a string")
        metadata = tuple(sorted(mnode.items()))

    return InteractiveObjectAsset(format_version=version, object_id=object_id,
                                  parts=tuple(parts), template=template, metadata=metadata)


def serialize_asset(asset: InteractiveObjectAsset) -> str:
    """Render an asset to its canonical document text; the asset must be valid."""
    from .ir import validate_asset
    from .errors import InvalidAssetError
    report = validate_asset(asset)
    if not report.ok:
        raise InvalidAssetError(report)
    return _render_document(_asset_to_tree(asset))


def parse_joint_document(text: str) -> JointSpec:
    """Parse a standalone joint document (the asset joint sub-schema)."""
    tree = _loads_strict(text)
    return _joint_from_tree(tree, "joint")


def serialize_joint_document(joint: JointSpec) -> str:
    return _render_document(_joint_to_tree(joint))


def parse_template_document(text: str) -> tuple[str, str]:
    """Parse a standalone template label document: (effect kind, mapping kind)."""
    tree = _loads_strict(text)
    _no_extras(tree, ("effect", "mapping"), "template")
    effect = _as_str(_need(tree, "effect", "template"), "template.effect", EFFECT_KINDS)
    mapping = _as_str(_need(tree, "mapping", "template"), "template.mapping", MAPPING_KINDS)
    return (effect, mapping)


def serialize_template_document(labels: tuple[str, str]) -> str:
    effect, mapping = labels
    return _render_document({"effect": effect, "mapping": mapping})


# ---------------------------------------------------------------------------
# point clouds

def pointcloud_format_for(path) -> str | None:
    """Infer a point cloud format from a file suffix, or None."""
    suffix = str(path)[str(path).rfind("."):] if "." in str(path) else ""
    return _POINTCLOUD_SUFFIXES.get(suffix.lower())


def _parse_xyz(text: str, path: str) -> PartGeometry:
    pts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        toks = s.split()
        if len(toks) != 3:
            raise FileFormatError("expected 3 numeric fields", path, lineno)
        try:
            pts.append([float(t) for t in toks])
        except ValueError:
            raise FileFormatError("field is not a real number", path, lineno) from None
    if not pts:
        raise FileFormatError("point cloud has no points", path)
    return PartGeometry(pts)


def _parse_obj(text: str, path: str) -> PartGeometry:
    pts: list[list[float]] = []
    faces: list[list[int]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        toks = line.split()
        if not toks or toks[0].startswith("#"):
            continue
        if toks[0] == "v":
            if len(toks) not in (4, 5):
                raise FileFormatError("vertex needs 3 coordinates", path, lineno)
            try:
                pts.append([float(t) for t in toks[1:4]])
            except ValueError:
                raise FileFormatError("vertex coordinate is not a real number",
                                      path, lineno) from None
        elif toks[0] == "f":
            if len(toks) != 4:
                raise FileFormatError("only triangle faces are supported", path, lineno)
            idx = []
            for tok in toks[1:]:
                head = tok.split("/")[0]
                try:
                    v = int(head)
                except ValueError:
                    raise FileFormatError("face index is not an integer", path, lineno) from None
                if v < 1:
                    raise FileFormatError("face indices must be positive", path, lineno)
                idx.append(v - 1)
            faces.append(idx)
    if not pts:
        raise FileFormatError("mesh has no vertices", path)
    try:
        return PartGeometry(pts, faces if faces else None)
    except ValueError as e:
        raise FileFormatError(str(e), path) from None


def _parse_ply(text: str, path: str) -> PartGeometry:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise FileFormatError("missing 'ply' magic line", path, 1)
    n_vertex = None
    n_face = 0
    vertex_props: list[str] = []
    current = None
    body_start = None
    saw_format = False
    for lineno, line in enumerate(lines[1:], 2):
        toks = line.split()
        if not toks:
            continue
        if toks[0] == "comment":
            continue
        if toks[0] == "format":
            if toks[1:3] != ["ascii", "1.0"]:
                raise FileFormatError("only 'format ascii 1.0' is supported", path, lineno)
            saw_format = True
        elif toks[0] == "element":
            if len(toks) != 3:
                raise FileFormatError("malformed element declaration", path, lineno)
            if toks[1] == "vertex":
                n_vertex = int(toks[2])
                current = "vertex"
            elif toks[1] == "face":
                n_face = int(toks[2])
                current = "face"
            else:
                raise FileFormatError(f"unsupported element {toks[1]!r}", path, lineno)
        elif toks[0] == "property":
            if current == "vertex" and toks[1] != "list":
                vertex_props.append(toks[-1])
        elif toks[0] == "end_header":
            body_start = lineno
            break
        else:
            raise FileFormatError(f"unexpected header line {toks[0]!r}", path, lineno)
    if body_start is None or not saw_format:
        raise FileFormatError("header is missing 'end_header' or 'format'", path)
    if n_vertex is None or n_vertex < 1:
        raise FileFormatError("header declares no vertices", path)
    for name in ("x", "y", "z"):
        if name not in vertex_props:
            raise FileFormatError(f"vertex element lacks property {name!r}", path)
    cols = [vertex_props.index(n) for n in ("x", "y", "z")]

    body = [(i, ln) for i, ln in enumerate(lines[body_start:], body_start + 1)
            if ln.strip()]
    if len(body) != n_vertex + n_face:
        raise FileFormatError(f"expected {n_vertex + n_face} body lines, found {len(body)}", path)
    pts = []
    for i, (lineno, line) in enumerate(body[:n_vertex]):
        toks = line.split()
        if len(toks) < len(vertex_props):
            raise FileFormatError("vertex line has too few fields", path, lineno)
        try:
            pts.append([float(toks[c]) for c in cols])
        except ValueError:
            raise FileFormatError("vertex coordinate is not a real number", path, lineno) from None
    faces = []
    for lineno, line in body[n_vertex:]:
        toks = line.split()
        try:
            count = int(toks[0])
            idx = [int(t) for t in toks[1:]]
        except (ValueError, IndexError):
            raise FileFormatError("malformed face line", path, lineno) from None
        if count != 3 or len(idx) != 3:
            raise FileFormatError("only triangle faces are supported", path, lineno)
        faces.append(idx)
    try:
        return PartGeometry(pts, faces if faces else None)
    except ValueError as e:
        raise FileFormatError(str(e), path) from None


def load_pointcloud(path, format: str) -> PartGeometry:
    """Load a point cloud or mesh file in one of the named formats."""
    if format not in GEOMETRY_FORMATS:
        raise ValueError(f"unknown point cloud format {format!r}")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if format == "xyz":
        return _parse_xyz(text, str(path))
    if format == "obj":
        return _parse_obj(text, str(path))
    return _parse_ply(text, str(path))


def write_pointcloud_xyz(path, geometry: PartGeometry):
    """Write points-only geometry as an xyz file."""
    lines = [" ".join(format_real(c) for c in row) for row in geometry.points]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# 2-D masks

class MaskImage:
    """Binary foreground mask stored as a read-only (height, width) array."""

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.array(pixels, dtype=bool)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("mask must be a nonempty 2-D array")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    def __setattr__(self, name, value):
        raise AttributeError("MaskImage is immutable")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other):
        if not isinstance(other, MaskImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"MaskImage({self.height}x{self.width}, foreground={int(self.pixels.sum())})"


def mask_format_for(path) -> str | None:
    """Infer a mask format from a file suffix, or None."""
    suffix = str(path)[str(path).rfind("."):] if "." in str(path) else ""
    return _MASK_SUFFIXES.get(suffix.lower())


def _parse_pgm(data: bytes, path: str) -> MaskImage:
    pos = 0
    n = len(data)

    def token():
        nonlocal pos
        while pos < n:
            c = data[pos:pos + 1]
            if c == b"#":
                while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < n and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FileFormatError("truncated header", path)
        return data[start:pos]

    if token() != b"P5":
        raise FileFormatError("not a binary PGM (P5) file", path)
    try:
        width = int(token())
        height = int(token())
        maxval = int(token())
    except ValueError:
        raise FileFormatError("malformed PGM header field", path) from None
    if width < 1 or height < 1:
        raise FileFormatError("PGM dimensions must be positive", path)
    if maxval != 255:
        raise FileFormatError(f"unsupported maxval {maxval}; expected 255", path)
    pos += 1  # single whitespace byte separates header and raster
    raster = data[pos:]
    if len(raster) != width * height:
        raise FileFormatError(f"expected {width * height} raster bytes, found {len(raster)}", path)
    arr = np.frombuffer(raster, dtype=np.uint8).reshape((height, width))
    return MaskImage(arr != 0)


def write_mask_pgm(path, mask: MaskImage):
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    raster = np.where(mask.pixels, 255, 0).astype(np.uint8).tobytes()
    with open(path, "wb") as fh:
        fh.write(header + raster)


def _parse_rle(text: str, path: str) -> MaskImage:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"invalid JSON: {e.msg}", path, e.lineno) from None
    if not isinstance(doc, dict) or set(doc) != {"size", "counts"}:
        raise FileFormatError("run-length mask needs exactly the keys 'size' and 'counts'", path)
    size = doc["size"]
    counts = doc["counts"]
    if (not isinstance(size, list) or len(size) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in size)):
        raise FileFormatError("'size' must be [height, width] with positive integers", path)
    height, width = size
    if (not isinstance(counts, list)
            or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in counts)):
        raise FileFormatError("'counts' must be a list of nonnegative integers", path)
    if sum(counts) != height * width:
        raise FileFormatError(f"run lengths sum to {sum(counts)}, expected {height * width}", path)
    values = np.arange(len(counts)) % 2 == 1  # runs alternate starting with background
    flat = np.repeat(values, counts)
    return MaskImage(flat.reshape((width, height)).T)  # column-major layout


def write_mask_rle(path, mask: MaskImage):
    flat = mask.pixels.T.reshape(-1)  # column-major layout
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    counts = np.diff(bounds).tolist()
    if flat[0]:
        counts = [0] + counts
    doc = {"size": [mask.height, mask.width], "counts": counts}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, separators=(", ", ": ")) + "\n")


def load_mask(path, format: str) -> MaskImage:
    """Load a binary mask in one of the named formats."""
    if format not in MASK_FORMATS:
        raise ValueError(f"unknown mask format {format!r}")
    if format == "pgm":
        with open(path, "rb") as fh:
            return _parse_pgm(fh.read(), str(path))
    with open(path, "r", encoding="utf-8") as fh:
        return _parse_rle(fh.read(), str(path))


def load_part_index_masks(path) -> tuple[int, dict[str, tuple[int, ...]]]:
    """Load a 3-D part mask document: point count plus per-part index lists."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"invalid JSON: {e.msg}", str(path), e.lineno) from None
    if not isinstance(doc, dict) or set(doc) != {"n_points", "masks"}:
        raise FileFormatError("expected exactly the keys 'n_points' and 'masks'", str(path))
    n = doc["n_points"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise FileFormatError("'n_points' must be a positive integer", str(path))
    masks = doc["masks"]
    if not isinstance(masks, dict):
        raise FileFormatError("'masks' must map part ids to index lists", str(path))
    out = {}
    for part, indices in masks.items():
        if (not isinstance(indices, list)
                or not all(isinstance(i, int) and not isinstance(i, bool) for i in indices)):
            raise FileFormatError(f"indices for part {part!r} must be integers", str(path))
        if any(i < 0 or i >= n for i in indices):
            raise FileFormatError(f"indices for part {part!r} out of bounds", str(path))
        out[part] = tuple(indices)
    return n, out


# ---------------------------------------------------------------------------
# traces

def _parse_csv_rows(text: str, header: str, n_fields: int, path: str | None):
    lines = text.splitlines()
    if not lines or lines[0].strip() != header:
        raise FileFormatError(f"first line must be the header {header!r}", path, 1)
    rows = []
    prev_t = None
    for lineno, line in enumerate(lines[1:], 2):
        s = line.strip()
        if not s:
            continue
        toks = s.split(",")
        if len(toks) != n_fields:
            raise FileFormatError(f"expected {n_fields} comma-separated fields", path, lineno)
        try:
            row = tuple(float(t) for t in toks)
        except ValueError:
            raise FileFormatError("field is not a real number", path, lineno) from None
        if not all(math.isfinite(v) for v in row):
            raise FileFormatError("fields must be finite", path, lineno)
        if prev_t is not None and row[0] <= prev_t:
            raise FileFormatError("times must be strictly increasing", path, lineno)
        prev_t = row[0]
        rows.append(row)
    return rows


def parse_trace(text: str, path: str | None = None) -> ActuationTrace:
    """Parse a receptor trace CSV with the exact header 't,receptor_state'."""
    return ActuationTrace(tuple(_parse_csv_rows(text, TRACE_HEADER, 2, path)))


def write_trace(trace: ActuationTrace) -> str:
    lines = [TRACE_HEADER]
    lines += [f"{format_real(t)},{format_real(r)}" for t, r in trace.samples]
    return "\n".join(lines) + "\n"


def parse_state_trace(text: str, path: str | None = None) -> StateTrace:
    """Parse a paired trace CSV with the exact header 't,receptor_state,effector_state'."""
    return StateTrace(tuple(_parse_csv_rows(text, STATE_TRACE_HEADER, 3, path)))


def write_state_trace(trace: StateTrace) -> str:
    lines = [STATE_TRACE_HEADER]
    lines += [f"{format_real(t)},{format_real(r)},{format_real(e)}" for t, r, e in trace.samples]
    return "\n".join(lines) + "\n"
