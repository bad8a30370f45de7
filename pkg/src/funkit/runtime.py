"""Mapping evaluation and trace simulation.

Resolves derivable mapping parameters (step threshold, linear slope and
offset), evaluates a mapping at a receptor state, and runs a timed receptor
trace through an asset to produce the paired effector trace.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import InvalidAssetError
from .ir import (BinaryMapping, CumulativeMapping, FunctionTemplate,
                 InteractiveObjectAsset, LinearMapping, MappingSpec, StateSpace,
                 StepMapping, validate_asset)
from .kinematics import clamp_state

# Fraction of the receptor maximum at which a derived step threshold sits.
STEP_THRESHOLD_FRACTION = 0.7


@dataclass(frozen=True)
class ActuationTrace:
    """Timed receptor states, (t, receptor_state) with strictly increasing t."""

    samples: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ts = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("trace times must be strictly increasing")


@dataclass(frozen=True)
class StateTrace:
    """Timed receptor and effector states, (t, receptor_state, effector_state)."""

    samples: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        ts = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("trace times must be strictly increasing")


def _bounds(space_or_range) -> tuple[float, float]:
    if isinstance(space_or_range, StateSpace):
        if not space_or_range.is_continuous:
            raise ValueError("a discrete state space has no numeric range")
        return space_or_range.bounds
    lo, hi = space_or_range
    return (float(lo), float(hi))


def derive_step_threshold(receptor_range) -> float:
    """Default step threshold: a fixed fraction of the receptor range maximum."""
    _, hi = _bounds(receptor_range)
    return STEP_THRESHOLD_FRACTION * hi


def derive_linear_slope(receptor_range, effector_range) -> tuple[float, float]:
    """Default linear coefficients (slope, offset) from the two ranges.

    The slope is the ratio of the range widths; the offset makes the receptor
    minimum map to the effector minimum.
    """
    r_lo, r_hi = _bounds(receptor_range)
    e_lo, e_hi = _bounds(effector_range)
    width = r_hi - r_lo
    if width == 0.0:
        raise ValueError("receptor range is degenerate")
    slope = (e_hi - e_lo) / width
    offset = e_lo - slope * r_lo
    return (slope, offset)


def resolve_mapping(template: FunctionTemplate) -> MappingSpec:
    """Fill derivable mapping parameters from the template's state spaces.

    Explicit values always win; only missing ones are derived. Binary and
    cumulative mappings have nothing to derive and pass through unchanged.
    """
    m = template.mapping
    if isinstance(m, StepMapping) and m.threshold is None:
        return replace(m, threshold=derive_step_threshold(template.receptor_space))
    if isinstance(m, LinearMapping) and (m.slope is None or m.offset is None):
        slope = m.slope
        offset = m.offset
        if slope is None:
            slope, derived_offset = derive_linear_slope(template.receptor_space,
                                                        template.effector_space)
            if offset is None:
                offset = derived_offset
        elif offset is None:
            e_lo, _ = _bounds(template.effector_space)
            r_lo, _ = _bounds(template.receptor_space)
            offset = e_lo - slope * r_lo
        return LinearMapping(slope=slope, offset=offset)
    return m


def eval_mapping(mapping: MappingSpec, receptor_state: float,
                 prev_effector_state: float | None = None) -> float:
    """Evaluate a mapping at one receptor state.

    Cumulative mappings are stateful: the receptor state is treated as an edge
    indicator (nonzero adds delta once) and ``prev_effector_state`` is
    required. Step and linear mappings must be resolved first if their
    parameters were omitted.
    """
    if isinstance(mapping, BinaryMapping):
        return mapping.on_value if receptor_state != 0.0 else mapping.off_value
    if isinstance(mapping, StepMapping):
        if mapping.threshold is None:
            raise ValueError("step threshold is unresolved; call resolve_mapping first")
        return mapping.high_value if receptor_state > mapping.threshold else mapping.low_value
    if isinstance(mapping, LinearMapping):
        if mapping.slope is None or mapping.offset is None:
            raise ValueError("linear coefficients are unresolved; call resolve_mapping first")
        return mapping.slope * receptor_state + mapping.offset
    if isinstance(mapping, CumulativeMapping):
        if prev_effector_state is None:
            raise ValueError("cumulative mapping needs the previous effector state")
        if receptor_state != 0.0:
            bumped = prev_effector_state + mapping.delta
            return min(max(bumped, mapping.clamp_min), mapping.clamp_max)
        return prev_effector_state
    raise ValueError(f"unknown mapping type {type(mapping).__name__}")


def run_trace(asset: InteractiveObjectAsset, trace: ActuationTrace) -> StateTrace:
    """Drive an asset's template with a receptor trace.

    Receptor samples are clamped to the receptor joint's range first (fixed
    joints pass samples through). Cumulative mappings start at their initial
    value and fire on rising edges, where the state before the first sample
    is taken to be zero.
    """
    report = validate_asset(asset)
    if not report.ok:
        raise InvalidAssetError(report)
    asset = report.canonical
    mapping = resolve_mapping(asset.template)
    joint = asset.receptor().joint

    out: list[tuple[float, float, float]] = []
    cumulative = isinstance(mapping, CumulativeMapping)
    effector = mapping.initial if cumulative else 0.0
    prev_receptor = 0.0
    for t, raw in trace.samples:
        r = clamp_state(joint, raw) if joint.joint_type != "fixed" else float(raw)
        if cumulative:
            fired = prev_receptor == 0.0 and r != 0.0
            effector = eval_mapping(mapping, r if fired else 0.0, effector)
        else:
            effector = eval_mapping(mapping, r)
        prev_receptor = r
        out.append((float(t), r, float(effector)))
    return StateTrace(tuple(out))
