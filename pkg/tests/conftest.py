"""Shared fixture builders: small hand-sized assets plus random generators."""

import time

import numpy as np
import pytest

SESSION_T0 = time.monotonic()


def pytest_collection_modifyitems(config, items):
    # run the acceptance gate last so its wall-clock check sees the whole suite
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")

from funkit import (BinaryMapping, CumulativeMapping, FluidEffect,
                    FunctionTemplate, GeometryEffect, GeometryRef,
                    IlluminationEffect, InteractiveObjectAsset, JointSpec,
                    LinearMapping, Part, PartGeometry, StateSpace,
                    StepMapping, TemperatureEffect)


def make_microwave_asset():
    """Step mapping, geometry effect: the door gates the cavity open state."""
    door = Part(
        id="door", role="receptor",
        geometry=GeometryRef("door.xyz", "xyz"),
        joint=JointSpec("revolute", (0.0, 0.0, 1.0), origin=(0.2, 0.0, 0.0),
                        range=(0.0, 1.5708)))
    cavity = Part(
        id="cavity", role="effector",
        geometry=GeometryRef("cavity.xyz", "xyz"),
        joint=JointSpec("fixed", (0.0, 0.0, 1.0)))
    template = FunctionTemplate(
        receptor_id="door", effector_id="cavity",
        receptor_space=StateSpace.continuous(0.0, 1.5708, "radian"),
        effector_space=StateSpace.discrete("closed", "open"),
        mapping=StepMapping(low_value=0.0, high_value=1.0, threshold=0.015),
        effect=GeometryEffect(target_joint="door"))
    return InteractiveObjectAsset(
        format_version="1.0", object_id="microwave-01",
        parts=(door, cavity), template=template,
        metadata=(("category", "microwave"),))


def make_lamp_asset():
    """Binary mapping, illumination effect: a toggle switch lights the bulb."""
    switch = Part(
        id="switch", role="receptor",
        geometry=GeometryRef("switch.xyz", "xyz"),
        joint=JointSpec("revolute", (1.0, 0.0, 0.0), origin=(0.0, 0.0, 0.4),
                        range=(0.0, 0.3)))
    bulb = Part(
        id="bulb", role="effector",
        geometry=GeometryRef("bulb.xyz", "xyz"),
        joint=JointSpec("fixed", (0.0, 0.0, 1.0)))
    template = FunctionTemplate(
        receptor_id="switch", effector_id="bulb",
        receptor_space=StateSpace.discrete("off", "on"),
        effector_space=StateSpace.discrete("dark", "lit"),
        mapping=BinaryMapping(on_value=1.0, off_value=0.0),
        effect=IlluminationEffect(intensity_range=(0.0, 1.0),
                                  source_position=(0.0, 0.0, 0.55)))
    return InteractiveObjectAsset(
        format_version="1.0", object_id="lamp-01",
        parts=(switch, bulb), template=template,
        metadata=(("category", "lamp"),))


def make_faucet_asset():
    """Linear mapping, fluid effect: handle angle scales the droplet size."""
    handle = Part(
        id="handle", role="receptor",
        geometry=GeometryRef("handle.xyz", "xyz"),
        joint=JointSpec("revolute", (0.0, 0.0, 1.0), origin=(0.0, 0.0, 0.2),
                        range=(0.0, 1.5708)))
    spout = Part(
        id="spout", role="effector",
        geometry=GeometryRef("spout.xyz", "xyz"),
        joint=JointSpec("fixed", (0.0, 0.0, 1.0)))
    template = FunctionTemplate(
        receptor_id="handle", effector_id="spout",
        receptor_space=StateSpace.continuous(0.0, 1.5708, "radian"),
        effector_space=StateSpace.continuous(0.001, 0.01, "flow-fraction"),
        mapping=LinearMapping(),
        effect=FluidEffect(emitter_position=(0.05, 0.0, 0.3),
                           droplet_size_range=(0.001, 0.01)))
    return InteractiveObjectAsset(
        format_version="1.0", object_id="faucet-01",
        parts=(handle, spout), template=template,
        metadata=(("category", "faucet"),))


def make_stove_asset():
    """Cumulative mapping, temperature effect: each press steps the heat up."""
    knob = Part(
        id="knob", role="receptor",
        geometry=GeometryRef("knob.xyz", "xyz"),
        joint=JointSpec("prismatic", (0.0, 0.0, 1.0), range=(0.0, 1.0)))
    burner = Part(
        id="burner", role="effector",
        geometry=GeometryRef("burner.xyz", "xyz"),
        joint=JointSpec("fixed", (0.0, 0.0, 1.0)))
    template = FunctionTemplate(
        receptor_id="knob", effector_id="burner",
        receptor_space=StateSpace.discrete("released", "pressed"),
        effector_space=StateSpace.discrete("off", "warm", "hot"),
        mapping=CumulativeMapping(delta=10.0, initial=20.0,
                                  clamp_min=20.0, clamp_max=40.0),
        effect=TemperatureEffect(temp_range=(20.0, 40.0),
                                 heat_source_position=(0.0, 0.0, 0.05)))
    return InteractiveObjectAsset(
        format_version="1.0", object_id="stove-01",
        parts=(knob, burner), template=template,
        metadata=(("category", "stove"),))


def _combo_mapping(kind):
    if kind == "binary":
        return BinaryMapping(on_value=1.0, off_value=0.0)
    if kind == "step":
        return StepMapping(low_value=0.0, high_value=1.0)
    if kind == "linear":
        return LinearMapping()
    return CumulativeMapping(delta=10.0, initial=20.0, clamp_min=20.0, clamp_max=40.0)


def _combo_spaces(mapping_kind, effect_kind):
    if mapping_kind in ("binary", "cumulative"):
        receptor = StateSpace.discrete("idle", "active")
    else:
        receptor = StateSpace.continuous(0.0, 1.5708, "radian")
    if mapping_kind == "linear":
        ranges = {"geometry": (0.0, 1.5708, "radian"),
                  "illumination": (0.0, 1.0, "intensity-fraction"),
                  "temperature": (20.0, 80.0, "celsius"),
                  "fluid": (0.001, 0.01, "flow-fraction")}
        effector = StateSpace.continuous(*ranges[effect_kind])
    else:
        effector = StateSpace.discrete("low", "high")
    return receptor, effector


def _combo_effect(effect_kind, receptor_id):
    if effect_kind == "geometry":
        return GeometryEffect(target_joint=receptor_id)
    if effect_kind == "illumination":
        return IlluminationEffect(intensity_range=(0.0, 1.0),
                                  source_position=(0.0, 0.0, 0.5))
    if effect_kind == "temperature":
        return TemperatureEffect(temp_range=(20.0, 80.0),
                                 heat_source_position=(0.0, 0.0, 0.1))
    return FluidEffect(emitter_position=(0.05, 0.0, 0.3),
                       droplet_size_range=(0.001, 0.01))


def make_combo_asset(mapping_kind, effect_kind):
    """A minimal valid asset for any of the 16 mapping x effect pairings."""
    handle = Part(
        id="handle", role="receptor",
        geometry=GeometryRef("handle.xyz", "xyz"),
        joint=JointSpec("revolute", (0.0, 0.0, 1.0), origin=(0.1, 0.0, 0.0),
                        range=(0.0, 1.5708)))
    body = Part(
        id="body", role="effector",
        geometry=GeometryRef("body.xyz", "xyz"),
        joint=JointSpec("fixed", (0.0, 0.0, 1.0)))
    receptor_space, effector_space = _combo_spaces(mapping_kind, effect_kind)
    template = FunctionTemplate(
        receptor_id="handle", effector_id="body",
        receptor_space=receptor_space, effector_space=effector_space,
        mapping=_combo_mapping(mapping_kind),
        effect=_combo_effect(effect_kind, "handle"))
    return InteractiveObjectAsset(
        format_version="1.0",
        object_id=f"combo-{mapping_kind}-{effect_kind}",
        parts=(handle, body), template=template,
        metadata=())


def random_unit_vector(rng):
    v = rng.normal(size=3)
    n = np.linalg.norm(v)
    while n < 1e-6:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
    return v / n


def random_joint(rng, joint_type=None):
    """A random valid JointSpec; ranges include 0 so state 0 is always legal."""
    if joint_type is None:
        joint_type = ("revolute", "prismatic", "fixed")[rng.integers(0, 3)]
    axis = tuple(float(c) for c in random_unit_vector(rng))
    if joint_type == "fixed":
        return JointSpec("fixed", axis)
    if joint_type == "prismatic":
        hi = float(rng.uniform(0.1, 0.8))
        return JointSpec("prismatic", axis, range=(float(rng.uniform(-0.5, 0.0)), hi))
    origin = tuple(float(c) for c in rng.uniform(-1.0, 1.0, size=3))
    hi = float(rng.uniform(0.5, 2.8))
    return JointSpec("revolute", axis, origin=origin,
                     range=(float(rng.uniform(-1.5, 0.0)), hi))


_WORDS = ("oven", "door", "lid", "valve", "lever", "dial", "vent", "tray",
          "rack", "hood", "tap", "grip")


def random_asset(rng):
    """A random valid asset covering all mapping and effect kinds."""
    mapping_kind = ("binary", "step", "linear", "cumulative")[rng.integers(0, 4)]
    effect_kind = ("geometry", "illumination", "temperature", "fluid")[rng.integers(0, 4)]
    receptor_id = _WORDS[rng.integers(0, len(_WORDS))]
    effector_id = receptor_id + "-fx"
    receptor_joint = random_joint(rng, ("revolute", "prismatic")[rng.integers(0, 2)])

    if mapping_kind in ("binary", "cumulative"):
        receptor_space = StateSpace.discrete("s0", "s1")
    elif mapping_kind == "step":
        # keep 0.7 * max strictly inside the range so a derived threshold is legal
        lo = float(rng.uniform(0.0, 0.5))
        receptor_space = StateSpace.continuous(lo, lo + float(rng.uniform(0.5, 2.0)),
                                               "radian")
    else:
        lo = float(rng.uniform(-1.0, 0.5))
        receptor_space = StateSpace.continuous(lo, lo + float(rng.uniform(0.5, 2.0)),
                                               "radian")
    if mapping_kind == "linear":
        lo = float(rng.uniform(0.0, 5.0))
        effector_space = StateSpace.continuous(lo, lo + float(rng.uniform(0.5, 3.0)),
                                               "intensity-fraction")
    else:
        effector_space = StateSpace.discrete("e0", "e1")

    if mapping_kind == "binary":
        mapping = BinaryMapping(on_value=float(rng.uniform(0.5, 2.0)), off_value=0.0)
    elif mapping_kind == "step":
        lo, hi = receptor_space.min, receptor_space.max
        threshold = (None if rng.random() < 0.5
                     else float(rng.uniform(lo + 1e-3, hi - 1e-3)))
        mapping = StepMapping(low_value=0.0, high_value=1.0, threshold=threshold)
    elif mapping_kind == "linear":
        if rng.random() < 0.5:
            mapping = LinearMapping()
        else:
            mapping = LinearMapping(slope=float(rng.uniform(0.2, 2.0)),
                                    offset=float(rng.uniform(-1.0, 1.0)))
    else:
        base = float(rng.uniform(0.0, 10.0))
        mapping = CumulativeMapping(delta=float(rng.uniform(0.5, 3.0)), initial=base,
                                    clamp_min=base, clamp_max=base + 20.0)

    if effect_kind == "geometry":
        effect = GeometryEffect(target_joint=receptor_id)
    elif effect_kind == "illumination":
        pos = (tuple(float(c) for c in rng.uniform(-1, 1, 3))
               if rng.random() < 0.5 else None)
        effect = IlluminationEffect(intensity_range=(0.0, float(rng.uniform(0.5, 1.0))),
                                    source_position=pos)
    elif effect_kind == "temperature":
        pos = (tuple(float(c) for c in rng.uniform(-1, 1, 3))
               if rng.random() < 0.5 else None)
        lo = float(rng.uniform(10.0, 30.0))
        effect = TemperatureEffect(temp_range=(lo, lo + float(rng.uniform(10.0, 60.0))),
                                   heat_source_position=pos)
    else:
        effect = FluidEffect(emitter_position=tuple(float(c) for c in rng.uniform(-1, 1, 3)),
                             droplet_size_range=(0.001, float(rng.uniform(0.005, 0.02))))

    parts = [
        Part(id=receptor_id, role="receptor",
             geometry=GeometryRef(f"{receptor_id}.xyz", "xyz"), joint=receptor_joint),
        Part(id=effector_id, role="effector",
             geometry=GeometryRef(f"{effector_id}.ply", "ply-ascii"),
             joint=JointSpec("fixed", (0.0, 0.0, 1.0))),
    ]
    if rng.random() < 0.3:
        parts.append(Part(id="shell", role="base",
                          geometry=GeometryRef("shell.obj", "obj"),
                          joint=JointSpec("fixed", (0.0, 0.0, 1.0))))
    # metadata keys sorted: the canonical form orders them, so equality holds
    metadata = tuple(sorted(
        (f"k{i}", f"v{rng.integers(0, 100)}") for i in range(rng.integers(0, 3))))
    template = FunctionTemplate(
        receptor_id=receptor_id, effector_id=effector_id,
        receptor_space=receptor_space, effector_space=effector_space,
        mapping=mapping, effect=effect)
    return InteractiveObjectAsset(
        format_version="1.0",
        object_id=f"obj-{rng.integers(0, 10**6):06d}",
        parts=tuple(parts), template=template, metadata=metadata)


def square_geometry():
    return PartGeometry(np.array(
        [[0.0, 0.0, 0.0], [0.4, 0.0, 0.0], [0.4, 0.0, 0.3], [0.0, 0.0, 0.3]]))


@pytest.fixture
def microwave():
    return make_microwave_asset()


@pytest.fixture
def lamp():
    return make_lamp_asset()


@pytest.fixture
def faucet():
    return make_faucet_asset()


@pytest.fixture
def stove():
    return make_stove_asset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
