"""Core data model for interactive objects.

An interactive object couples a manipulated part (the receptor) with a
responding part (the effector) through a function template: a numeric mapping
from receptor state to effector state plus a physical effect that realizes the
effector state in a scene. This module defines the immutable value types,
mapping classification, and structural validation. Parsing and serialization
live in ``assetio``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import ClassVar, Union

import numpy as np

JOINT_TYPES = ("fixed", "prismatic", "revolute")
MAPPING_KINDS = ("binary", "step", "linear", "cumulative")
EFFECT_KINDS = ("geometry", "illumination", "temperature", "fluid")
PART_ROLES = ("receptor", "effector", "base")
STATE_UNITS = ("radian", "meter", "celsius", "intensity-fraction", "flow-fraction")
GEOMETRY_FORMATS = ("xyz", "ply-ascii", "obj")

# A stored axis is accepted as unit length within this tolerance; anything
# further off is normalized into the canonical copy with a warning.
AXIS_UNIT_TOL = 1e-9

Vec3 = tuple[float, float, float]
Range = tuple[float, float]


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _finite(*values) -> bool:
    return all(_is_number(v) and math.isfinite(v) for v in values)


def _finite_vec3(v) -> bool:
    return v is not None and len(v) == 3 and _finite(*v)


@dataclass(frozen=True)
class StateSpace:
    """State set of a part: named labels (discrete) or a closed interval (continuous)."""

    kind: str
    labels: tuple[str, ...] | None = None
    min: float | None = None
    max: float | None = None
    unit: str | None = None

    @staticmethod
    def discrete(*labels: str) -> "StateSpace":
        return StateSpace(kind="discrete", labels=tuple(labels))

    @staticmethod
    def continuous(lo: float, hi: float, unit: str) -> "StateSpace":
        return StateSpace(kind="continuous", min=lo, max=hi, unit=unit)

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"

    @property
    def is_continuous(self) -> bool:
        return self.kind == "continuous"

    @property
    def bounds(self) -> Range:
        if self.min is None or self.max is None:
            raise ValueError("state space has no numeric bounds")
        return (self.min, self.max)


@dataclass(frozen=True)
class JointSpec:
    """Single-degree-of-freedom joint: type, unit axis, origin point, state range.

    Origin is required for revolute joints (the axis passes through it) and
    meaningless for prismatic/fixed ones. Range bounds the joint state in
    radians or meters; fixed joints carry none.
    """

    joint_type: str
    axis: Vec3
    origin: Vec3 | None = None
    range: Range | None = None


@dataclass(frozen=True)
class BinaryMapping:
    """Two-state mapping: nonzero receptor state selects on_value, zero selects off_value."""

    on_value: float
    off_value: float
    kind: ClassVar[str] = "binary"


@dataclass(frozen=True)
class StepMapping:
    """Threshold mapping: receptor state strictly above threshold selects high_value.

    A missing threshold is derived from the receptor range at resolution time.
    """

    low_value: float
    high_value: float
    threshold: float | None = None
    kind: ClassVar[str] = "step"


@dataclass(frozen=True)
class LinearMapping:
    """Affine mapping effector = slope * receptor + offset.

    Missing slope/offset are derived from the state-space ranges at resolution
    time: slope is the ratio of the range widths and offset anchors the
    receptor minimum to the effector minimum.
    """

    slope: float | None = None
    offset: float | None = None
    kind: ClassVar[str] = "linear"


@dataclass(frozen=True)
class CumulativeMapping:
    """Stateful mapping: each rising edge of the receptor adds delta, clamped."""

    delta: float
    initial: float
    clamp_min: float
    clamp_max: float
    kind: ClassVar[str] = "cumulative"


MappingSpec = Union[BinaryMapping, StepMapping, LinearMapping, CumulativeMapping]


@dataclass(frozen=True)
class GeometryEffect:
    """Effector state drives the joint of the named part."""

    target_joint: str
    kind: ClassVar[str] = "geometry"


@dataclass(frozen=True)
class IlluminationEffect:
    """Effector state drives a light source; position defaults to the effector bbox center."""

    intensity_range: Range
    source_position: Vec3 | None = None
    kind: ClassVar[str] = "illumination"


@dataclass(frozen=True)
class TemperatureEffect:
    """Effector state drives a heat source; position defaults to the effector bbox center."""

    temp_range: Range
    heat_source_position: Vec3 | None = None
    kind: ClassVar[str] = "temperature"


@dataclass(frozen=True)
class FluidEffect:
    """Effector state drives a particle emitter; position is always explicit."""

    emitter_position: Vec3
    droplet_size_range: Range
    kind: ClassVar[str] = "fluid"


PhysicalEffectSpec = Union[GeometryEffect, IlluminationEffect, TemperatureEffect, FluidEffect]


@dataclass(frozen=True)
class GeometryRef:
    """Pointer to an on-disk geometry file for a part."""

    file: str
    format: str


class PartGeometry:
    """Point set in meters with optional triangle faces.

    Arrays are stored read-only; equality is element-wise.
    """

    __slots__ = ("points", "faces")

    def __init__(self, points, faces=None):
        pts = np.array(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] == 0:
            raise ValueError("points must be a nonempty (N, 3) array")
        if not np.isfinite(pts).all():
            raise ValueError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if faces is None:
            object.__setattr__(self, "faces", None)
        else:
            f = np.array(faces, dtype=int)
            if f.ndim != 2 or f.shape[1] != 3:
                raise ValueError("faces must be an (M, 3) index array")
            if f.size and (f.min() < 0 or f.max() >= pts.shape[0]):
                raise ValueError("face indices out of bounds")
            f.setflags(write=False)
            object.__setattr__(self, "faces", f)

    def __setattr__(self, name, value):
        raise AttributeError("PartGeometry is immutable")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PartGeometry):
            return NotImplemented
        if not np.array_equal(self.points, other.points):
            return False
        if (self.faces is None) != (other.faces is None):
            return False
        return self.faces is None or np.array_equal(self.faces, other.faces)

    def __repr__(self):
        nf = 0 if self.faces is None else self.faces.shape[0]
        return f"PartGeometry(n_points={self.n_points}, n_faces={nf})"


@dataclass(frozen=True)
class Part:
    """Named rigid part with a role, a geometry reference, and a joint."""

    id: str
    role: str
    geometry: GeometryRef
    joint: JointSpec


@dataclass(frozen=True)
class FunctionTemplate:
    """Receptor-to-effector state mapping plus the physical effect realizing it."""

    receptor_id: str
    effector_id: str
    receptor_space: StateSpace
    effector_space: StateSpace
    mapping: MappingSpec
    effect: PhysicalEffectSpec


@dataclass(frozen=True)
class InteractiveObjectAsset:
    """A complete interactive object: parts, one function template, free-form metadata."""

    format_version: str
    object_id: str
    parts: tuple[Part, ...]
    template: FunctionTemplate
    metadata: tuple[tuple[str, str], ...] = ()

    def part(self, part_id: str) -> Part:
        for p in self.parts:
            if p.id == part_id:
                return p
        raise KeyError(part_id)

    def receptor(self) -> Part:
        return self.part(self.template.receptor_id)

    def effector(self) -> Part:
        return self.part(self.template.effector_id)


def classify_mapping(receptor_space: StateSpace, effector_space: StateSpace,
                     stateful: bool = False) -> frozenset[str]:
    """Return the set of admissible mapping kinds for a state-space pairing.

    Exactly four pairings admit a mapping: discrete-to-discrete is binary when
    stateless and cumulative when stateful, continuous-to-discrete is step,
    continuous-to-continuous is linear. Everything else returns the empty set.
    """
    r, e = receptor_space.kind, effector_space.kind
    if stateful:
        if r == "discrete" and e == "discrete":
            return frozenset({"cumulative"})
        return frozenset()
    if r == "discrete" and e == "discrete":
        return frozenset({"binary"})
    if r == "continuous" and e == "discrete":
        return frozenset({"step"})
    if r == "continuous" and e == "continuous":
        return frozenset({"linear"})
    return frozenset()


@dataclass(frozen=True)
class Violation:
    """A single broken invariant, identified by a stable kebab-case code."""

    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_asset: violations, warnings, and a canonical copy.

    The canonical copy is present only when there are no violations; it equals
    the input except that warned non-unit joint axes are normalized.
    """

    violations: tuple[Violation, ...]
    warnings: tuple[Violation, ...]
    canonical: InteractiveObjectAsset | None

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_space(space: StateSpace, where: str, bad: list[Violation]):
    if space.kind == "discrete":
        if not space.labels or len(space.labels) < 2:
            bad.append(Violation("space-labels-few",
                                 f"{where}: discrete space needs at least 2 labels"))
        elif any(not isinstance(label, str) or not label for label in space.labels):
            bad.append(Violation("space-label-invalid",
                                 f"{where}: labels must be non-empty strings"))
        elif len(set(space.labels)) != len(space.labels):
            bad.append(Violation("space-labels-duplicate",
                                 f"{where}: discrete labels must be distinct"))
    elif space.kind == "continuous":
        if space.min is None or space.max is None:
            bad.append(Violation("space-bounds-missing",
                                 f"{where}: continuous space needs min and max"))
        elif not _finite(space.min, space.max):
            bad.append(Violation("space-bounds-nonfinite",
                                 f"{where}: bounds must be finite"))
        elif not space.min < space.max:
            bad.append(Violation("space-bounds-order",
                                 f"{where}: min must be strictly below max"))
        if space.unit not in STATE_UNITS:
            bad.append(Violation("space-unit-unknown",
                                 f"{where}: unknown unit {space.unit!r}"))
    else:
        bad.append(Violation("space-kind-unknown",
                             f"{where}: unknown state space kind {space.kind!r}"))


def _check_joint(part: Part, bad: list[Violation], warn: list[Violation],
                 fixed_axes: dict[str, Vec3]):
    j = part.joint
    pid = part.id
    if j.joint_type not in JOINT_TYPES:
        bad.append(Violation("unknown-joint-type",
                             f"part {pid!r}: unknown joint type {j.joint_type!r}"))
        return
    if not _finite_vec3(j.axis):
        bad.append(Violation("axis-nonfinite", f"part {pid!r}: joint axis must be 3 finite reals"))
    else:
        n = math.sqrt(sum(c * c for c in j.axis))
        if n < 1e-12:
            bad.append(Violation("axis-zero", f"part {pid!r}: joint axis has zero length"))
        elif abs(n - 1.0) > AXIS_UNIT_TOL:
            warn.append(Violation("axis-not-unit",
                                  f"part {pid!r}: joint axis norm {n:.12g} normalized"))
            fixed_axes[pid] = tuple(float(c / n) for c in j.axis)
    if j.joint_type != "fixed":
        if j.range is None:
            bad.append(Violation("range-missing",
                                 f"part {pid!r}: {j.joint_type} joint needs a state range"))
        elif not _finite(*j.range):
            bad.append(Violation("range-nonfinite", f"part {pid!r}: joint range must be finite"))
        elif j.range[0] > j.range[1]:
            bad.append(Violation("range-order", f"part {pid!r}: joint range min exceeds max"))
    if j.joint_type == "revolute" and j.origin is None:
        bad.append(Violation("origin-missing", f"part {pid!r}: revolute joint needs an origin"))
    if j.origin is not None and not _finite_vec3(j.origin):
        bad.append(Violation("origin-nonfinite", f"part {pid!r}: joint origin must be 3 finite reals"))


def _check_range_pair(rng, label: str, bad: list[Violation]):
    if not _finite(*rng):
        bad.append(Violation("effect-range-nonfinite", f"{label} must be finite"))
    elif rng[0] > rng[1]:
        bad.append(Violation("effect-range-order", f"{label} min exceeds max"))


def _check_mapping(tpl: FunctionTemplate, bad: list[Violation]):
    m = tpl.mapping
    admissible = classify_mapping(tpl.receptor_space, tpl.effector_space,
                                  stateful=isinstance(m, CumulativeMapping))
    if m.kind not in admissible:
        allowed = ", ".join(sorted(admissible)) or "none"
        bad.append(Violation("mapping-space-mismatch",
                             f"mapping {m.kind!r} not admissible for this state-space pairing"
                             f" (admissible: {allowed})"))
    if isinstance(m, BinaryMapping):
        if not _finite(m.on_value, m.off_value):
            bad.append(Violation("mapping-value-nonfinite", "binary on/off values must be finite"))
        for space, name in ((tpl.receptor_space, "receptor"), (tpl.effector_space, "effector")):
            if space.is_discrete and space.labels and len(space.labels) != 2:
                bad.append(Violation("binary-label-count",
                                     f"binary mapping needs exactly 2 {name} labels"))
    elif isinstance(m, StepMapping):
        if not _finite(m.low_value, m.high_value):
            bad.append(Violation("mapping-value-nonfinite", "step low/high values must be finite"))
        if m.threshold is not None:
            if not _finite(m.threshold):
                bad.append(Violation("step-threshold-nonfinite", "step threshold must be finite"))
            else:
                rs = tpl.receptor_space
                if (rs.is_continuous and _finite(rs.min, rs.max)
                        and not rs.min < m.threshold < rs.max):
                    bad.append(Violation("step-threshold-outside-range",
                                         "step threshold must lie strictly inside the receptor range"))
    elif isinstance(m, LinearMapping):
        if m.slope is not None and (not _finite(m.slope) or m.slope == 0.0):
            bad.append(Violation("linear-slope-zero", "linear slope must be finite and nonzero"))
        if m.offset is not None and not _finite(m.offset):
            bad.append(Violation("linear-offset-nonfinite", "linear offset must be finite"))
    elif isinstance(m, CumulativeMapping):
        if not _finite(m.delta, m.initial, m.clamp_min, m.clamp_max):
            bad.append(Violation("cumulative-value-nonfinite",
                                 "cumulative parameters must be finite"))
        else:
            if m.delta == 0.0:
                bad.append(Violation("cumulative-delta-zero", "cumulative delta must be nonzero"))
            if m.clamp_min > m.clamp_max:
                bad.append(Violation("cumulative-clamp-order", "cumulative clamp min exceeds max"))
            elif not m.clamp_min <= m.initial <= m.clamp_max:
                bad.append(Violation("cumulative-initial-outside-clamp",
                                     "cumulative initial value must lie inside the clamp range"))
    else:
        bad.append(Violation("mapping-kind-unknown", f"unknown mapping type {type(m).__name__}"))


def _check_effect(asset: InteractiveObjectAsset, bad: list[Violation]):
    eff = asset.template.effect
    by_id = {}
    for p in asset.parts:
        by_id.setdefault(p.id, p)
    if isinstance(eff, GeometryEffect):
        target = by_id.get(eff.target_joint)
        if target is None:
            bad.append(Violation("geometry-target-unknown",
                                 f"geometry effect targets unknown part {eff.target_joint!r}"))
        elif target.joint.joint_type == "fixed":
            bad.append(Violation("geometry-target-fixed",
                                 f"geometry effect target {eff.target_joint!r} has a fixed joint"))
    elif isinstance(eff, IlluminationEffect):
        _check_range_pair(eff.intensity_range, "intensity range", bad)
        if eff.source_position is not None and not _finite_vec3(eff.source_position):
            bad.append(Violation("effect-position-nonfinite", "light source position must be finite"))
    elif isinstance(eff, TemperatureEffect):
        _check_range_pair(eff.temp_range, "temperature range", bad)
        if eff.heat_source_position is not None and not _finite_vec3(eff.heat_source_position):
            bad.append(Violation("effect-position-nonfinite", "heat source position must be finite"))
    elif isinstance(eff, FluidEffect):
        _check_range_pair(eff.droplet_size_range, "droplet size range", bad)
        if not _finite_vec3(eff.emitter_position):
            bad.append(Violation("effect-position-nonfinite", "emitter position must be finite"))
    else:
        bad.append(Violation("effect-kind-unknown", f"unknown effect type {type(eff).__name__}"))


def validate_asset(asset: InteractiveObjectAsset) -> ValidationReport:
    """Check every structural invariant of an asset and report breaches as data.

    Violations block downstream use; warnings do not. When there are no
    violations the report carries a canonical copy with warned non-unit axes
    normalized; validating the canonical copy yields an empty report.
    """
    bad: list[Violation] = []
    warn: list[Violation] = []
    fixed_axes: dict[str, Vec3] = {}

    if not asset.parts:
        bad.append(Violation("empty-parts", "asset has no parts"))

    seen: set[str] = set()
    for p in asset.parts:
        if not p.id:
            bad.append(Violation("part-id-empty", "part id must be a nonempty string"))
        if p.id in seen:
            bad.append(Violation("duplicate-part-id", f"part id {p.id!r} appears more than once"))
        seen.add(p.id)
        if p.role not in PART_ROLES:
            bad.append(Violation("unknown-role", f"part {p.id!r}: unknown role {p.role!r}"))
        if not p.geometry.file:
            bad.append(Violation("geometry-ref-file-empty", f"part {p.id!r}: empty geometry path"))
        if p.geometry.format not in GEOMETRY_FORMATS:
            bad.append(Violation("geometry-ref-format-unknown",
                                 f"part {p.id!r}: unknown geometry format {p.geometry.format!r}"))
        _check_joint(p, bad, warn, fixed_axes)

    receptors = [p for p in asset.parts if p.role == "receptor"]
    effectors = [p for p in asset.parts if p.role == "effector"]
    if not receptors:
        bad.append(Violation("missing-receptor", "asset must contain exactly one receptor part"))
    elif len(receptors) > 1:
        bad.append(Violation("duplicate-receptor",
                             f"{len(receptors)} parts have role 'receptor'"))
    if not effectors:
        bad.append(Violation("missing-effector", "asset must contain exactly one effector part"))
    elif len(effectors) > 1:
        bad.append(Violation("duplicate-effector",
                             f"{len(effectors)} parts have role 'effector'"))

    tpl = asset.template
    by_id = {}
    for p in asset.parts:
        by_id.setdefault(p.id, p)
    if tpl.receptor_id == tpl.effector_id:
        bad.append(Violation("template-self-loop", "receptor and effector must be distinct parts"))
    for pid, role in ((tpl.receptor_id, "receptor"), (tpl.effector_id, "effector")):
        ref = by_id.get(pid)
        if ref is None:
            bad.append(Violation("template-part-unknown",
                                 f"template references unknown part {pid!r}"))
        elif ref.role != role:
            bad.append(Violation("template-role-mismatch",
                                 f"template {role} {pid!r} has role {ref.role!r}"))

    _check_space(tpl.receptor_space, "receptor space", bad)
    _check_space(tpl.effector_space, "effector space", bad)
    _check_mapping(tpl, bad)
    _check_effect(asset, bad)

    if bad:
        return ValidationReport(tuple(bad), tuple(warn), None)

    canonical = asset
    if fixed_axes:
        new_parts = tuple(
            replace(p, joint=replace(p.joint, axis=fixed_axes[p.id])) if p.id in fixed_axes else p
            for p in asset.parts)
        canonical = replace(asset, parts=new_parts)
    return ValidationReport((), tuple(warn), canonical)
