"""Compile validated assets into simulator-specific script fragments.

Each emitted script is deterministic text: a comment manifest carrying the
resolved numeric parameters, then a body that reads the receptor state
through the target's accessor and drives the effector through the target's
setter, wrapped in the control-flow skeleton of the mapping kind.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import CodegenError, InvalidAssetError, UnknownTargetError
from .ir import (FluidEffect, GeometryEffect, IlluminationEffect,
                 InteractiveObjectAsset, PartGeometry, StateSpace,
                 TemperatureEffect, validate_asset)
from .assetio import format_real
from .runtime import resolve_mapping


@dataclass(frozen=True)
class Target:
    """A supported simulator backend.

    ``capabilities`` names the physical effects the backend is the native
    choice for; every target can still emit every effect.
    """

    name: str
    capabilities: frozenset[str]
    file_suffix: str = ".script"
    shebang: str | None = None


TARGETS = (
    Target("genesis", frozenset({"fluid"})),
    Target("isaacsim", frozenset({"geometry"})),
    Target("behavior", frozenset({"illumination", "temperature"})),
)


def list_targets() -> list[Target]:
    """All registered targets, in stable order."""
    return list(TARGETS)


def get_target(name: str) -> Target:
    for t in TARGETS:
        if t.name == name:
            return t
    known = ", ".join(t.name for t in TARGETS)
    raise UnknownTargetError(f"unknown target {name!r} (known: {known})")


@dataclass(frozen=True)
class EmittedScript:
    """Result of compiling one asset for one target."""

    source_text: str
    target: Target
    manifest: dict


def script_filename(object_id: str, target: Target) -> str:
    return f"{object_id}.{target.name}{target.file_suffix}"


def compute_effect_anchor(geometry: PartGeometry) -> tuple[float, float, float]:
    """Anchor position for a derived effect source: the bounding-box center."""
    pts = geometry.points
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return tuple(((lo + hi) / 2.0).tolist())


def _identifier(part_id: str) -> str:
    ident = re.sub(r"[^0-9A-Za-z_]", "_", part_id)
    if not ident or ident[0].isdigit():
        ident = "_" + ident
    return ident


@dataclass(frozen=True)
class _Ctx:
    target: Target
    object_id: str
    receptor: str
    effector: str
    receptor_space: StateSpace
    effector_space: StateSpace
    mapping_kind: str
    effect_kind: str
    anchor: tuple | None


def _receptor_access(ctx: _Ctx) -> tuple[list[str], str]:
    """Setup lines plus the expression holding the receptor state."""
    if ctx.target.name == "isaacsim":
        return ([f"joint_state = scene[{json.dumps(ctx.object_id)}].data.joint_pos"],
                "joint_state[0][0]")
    if ctx.target.name == "behavior":
        if ctx.receptor_space.is_discrete:
            return ([], f"{ctx.receptor}.states[object_states.ToggledOn].get_value()")
        var = f"{ctx.receptor}_state"
        return ([f"{var} = {ctx.receptor}.states[object_states.Joint].get_value()"], var)
    var = f"{ctx.receptor}_position"
    return ([f"{var} = {ctx.receptor}.get_dofs_position(dofs_idx)[0]"], var)


def _vec_literal(vec) -> str:
    return "[" + ", ".join(format_real(c) for c in vec) + "]"


def _set_isaacsim(ctx: _Ctx, value: str) -> list[str]:
    obj = json.dumps(ctx.object_id)
    if ctx.effect_kind == "geometry":
        return [f"scene[{obj}].set_joint_position_target(torch.Tensor([[{value}, receptor_target]]))"]
    if ctx.effect_kind == "illumination":
        return [f"scene[{obj}].set_light_intensity({json.dumps(ctx.effector)}, {value})"]
    if ctx.effect_kind == "temperature":
        return [f"scene[{obj}].set_temperature({json.dumps(ctx.effector)}, {value})"]
    return [f"scene[{obj}].emit_fluid({json.dumps(ctx.effector)}, droplet_size={value})"]


def _set_behavior(ctx: _Ctx, value: str) -> list[str]:
    if ctx.effect_kind == "illumination":
        if ctx.mapping_kind in ("binary", "step"):
            return [f"{ctx.effector}.visible = {value}"]
        return [f"{ctx.effector}.intensity = {value}"]
    if ctx.effect_kind == "temperature":
        return [f"{ctx.effector}.states[object_states.HeatSourceOrSink].set_value({value})"]
    if ctx.effect_kind == "geometry":
        return [f"{ctx.effector}.states[object_states.Joint].set_value({value})"]
    return [f"{ctx.effector}.states[object_states.FluidSource].set_value({value})"]


def _set_genesis(ctx: _Ctx, value: str) -> list[str]:
    if ctx.effect_kind == "fluid":
        return [
            "emitter.emit(",
            f"    pos=np.array({_vec_literal(ctx.anchor)}),  # emitter position from the asset, used as-is",
            "    direction=np.array([0.0, 0.0, -1.0]),",
            "    speed=5,",
            '    droplet_shape="circle",',
            f"    droplet_size={value},",
            ")",
        ]
    if ctx.effect_kind == "geometry":
        return [f"{ctx.effector}.set_dofs_position(np.array([{value}]), effector_dofs_idx)"]
    if ctx.effect_kind == "illumination":
        return [f"{ctx.effector}_light.set_intensity({value})"]
    return [f"{ctx.effector}.set_temperature({value})"]


_SETTERS = {"isaacsim": _set_isaacsim, "behavior": _set_behavior, "genesis": _set_genesis}


def _branch_values(ctx: _Ctx, fire_value: float, rest_value: float) -> tuple[str, str]:
    # Visibility toggles render as booleans, everything else as numbers.
    if (ctx.target.name == "behavior" and ctx.effect_kind == "illumination"
            and ctx.mapping_kind in ("binary", "step")):
        return ("True", "False")
    return (format_real(fire_value), format_real(rest_value))


def _indent(lines: list[str]) -> list[str]:
    return ["    " + line for line in lines]


def _render_body(ctx: _Ctx, mapping) -> list[str]:
    setup, rexpr = _receptor_access(ctx)
    setter = _SETTERS[ctx.target.name]

    if ctx.mapping_kind == "binary":
        fire, rest = _branch_values(ctx, mapping.on_value, mapping.off_value)
        return (setup + [f"if {rexpr}:"] + _indent(setter(ctx, fire))
                + ["else:"] + _indent(setter(ctx, rest)))

    if ctx.mapping_kind == "step":
        fire, rest = _branch_values(ctx, mapping.high_value, mapping.low_value)
        return (setup + [f"if {rexpr} > {format_real(mapping.threshold)}:"]
                + _indent(setter(ctx, fire)) + ["else:"] + _indent(setter(ctx, rest)))

    if ctx.mapping_kind == "linear":
        var = "droplet_size" if ctx.effect_kind == "fluid" else f"{ctx.effector}_state"
        r_min = ctx.receptor_space.min
        base = mapping.offset + mapping.slope * r_min
        line = (f"{var} = {format_real(mapping.slope)} * ({rexpr} - {format_real(r_min)})"
                f" + {format_real(base)}")
        return setup + [line] + setter(ctx, var)

    var = f"{ctx.effector}_state"
    note = (f"# {var} persists across invocations;"
            f" initialize to {format_real(mapping.initial)} at scene setup")
    inner = [f"{var} = {var} + {format_real(mapping.delta)}",
             f"{var} = min(max({var}, {format_real(mapping.clamp_min)}),"
             f" {format_real(mapping.clamp_max)})"]
    inner += setter(ctx, var)
    return [note] + setup + [f"if {rexpr}:"] + _indent(inner)


def _build_manifest(asset: InteractiveObjectAsset, target: Target, mapping, effect,
                    anchor) -> dict:
    manifest: dict = {
        "object_id": asset.object_id,
        "target": target.name,
        "mapping": mapping.kind,
        "effect": effect.kind,
    }
    if mapping.kind == "binary":
        manifest["on_value"] = float(mapping.on_value)
        manifest["off_value"] = float(mapping.off_value)
    elif mapping.kind == "step":
        manifest["threshold"] = float(mapping.threshold)
        manifest["low_value"] = float(mapping.low_value)
        manifest["high_value"] = float(mapping.high_value)
    elif mapping.kind == "linear":
        manifest["slope"] = float(mapping.slope)
        manifest["offset"] = float(mapping.offset)
    else:
        manifest["delta"] = float(mapping.delta)
        manifest["initial"] = float(mapping.initial)
        manifest["clamp_min"] = float(mapping.clamp_min)
        manifest["clamp_max"] = float(mapping.clamp_max)

    if isinstance(effect, GeometryEffect):
        manifest["target_joint"] = effect.target_joint
    elif isinstance(effect, IlluminationEffect):
        manifest["anchor"] = tuple(float(c) for c in anchor)
        manifest["intensity_min"] = float(effect.intensity_range[0])
        manifest["intensity_max"] = float(effect.intensity_range[1])
    elif isinstance(effect, TemperatureEffect):
        manifest["anchor"] = tuple(float(c) for c in anchor)
        manifest["temp_min"] = float(effect.temp_range[0])
        manifest["temp_max"] = float(effect.temp_range[1])
    else:
        manifest["anchor"] = tuple(float(c) for c in anchor)
        manifest["droplet_size_min"] = float(effect.droplet_size_range[0])
        manifest["droplet_size_max"] = float(effect.droplet_size_range[1])
    return manifest


_MANIFEST_STRING_KEYS = ("object_id", "target", "mapping", "effect", "target_joint")
_MANIFEST_LINE = re.compile(r"^#   (\w+) = (.*)$")


def parse_manifest(source_text: str) -> dict:
    """Recover the parameter manifest from an emitted script's comment block."""
    lines = source_text.splitlines()
    try:
        start = lines.index("# manifest:")
        end = lines.index("# end-manifest")
    except ValueError:
        raise CodegenError("script has no manifest block") from None
    manifest: dict = {}
    for line in lines[start + 1:end]:
        m = _MANIFEST_LINE.match(line)
        if m is None:
            raise CodegenError(f"malformed manifest line {line!r}")
        key, raw = m.group(1), m.group(2)
        if key in _MANIFEST_STRING_KEYS:
            manifest[key] = raw
        elif raw.startswith("["):
            if not raw.endswith("]"):
                raise CodegenError(f"malformed manifest vector {raw!r}")
            manifest[key] = tuple(float(c) for c in raw[1:-1].split(","))
        else:
            manifest[key] = float(raw)
    return manifest


def _resolve_anchor(asset: InteractiveObjectAsset, effect,
                    geometries: dict | None) -> tuple | None:
    if isinstance(effect, GeometryEffect):
        return None
    if isinstance(effect, FluidEffect):
        return tuple(effect.emitter_position)
    explicit = (effect.source_position if isinstance(effect, IlluminationEffect)
                else effect.heat_source_position)
    if explicit is not None:
        return tuple(explicit)
    effector_id = asset.template.effector_id
    if not geometries or effector_id not in geometries:
        raise CodegenError(
            f"deriving the {effect.kind} anchor needs the effector geometry {effector_id!r}")
    return compute_effect_anchor(geometries[effector_id])


def emit_script(asset: InteractiveObjectAsset, target, geometries=None) -> EmittedScript:
    """Compile a valid asset for one target.

    ``geometries`` maps part ids to PartGeometry and is consulted only when an
    illumination or temperature effect omits its source position, in which
    case the anchor is the effector's bounding-box center.
    """
    if isinstance(target, str):
        target = get_target(target)
    report = validate_asset(asset)
    if not report.ok:
        raise InvalidAssetError(report)
    asset = report.canonical

    tpl = asset.template
    mapping = resolve_mapping(tpl)
    anchor = _resolve_anchor(asset, tpl.effect, geometries)
    ctx = _Ctx(target=target,
               object_id=asset.object_id,
               receptor=_identifier(tpl.receptor_id),
               effector=_identifier(tpl.effector_id),
               receptor_space=tpl.receptor_space,
               effector_space=tpl.effector_space,
               mapping_kind=mapping.kind,
               effect_kind=tpl.effect.kind,
               anchor=anchor)

    manifest = _build_manifest(asset, target, mapping, tpl.effect, anchor)
    lines = ["# auto-generated simulator script; regenerate from the asset, do not edit"]
    if target.shebang is not None:
        lines.insert(0, target.shebang)
    lines.append("# manifest:")
    for key, value in manifest.items():
        if isinstance(value, str):
            rendered = value
        elif isinstance(value, tuple):
            rendered = _vec_literal(value)
        else:
            rendered = format_real(value)
        lines.append(f"#   {key} = {rendered}")
    lines.append("# end-manifest")
    lines.append("")
    lines += _render_body(ctx, mapping)
    return EmittedScript(source_text="\n".join(lines) + "\n", target=target, manifest=manifest)
