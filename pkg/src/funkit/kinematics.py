"""Rigid transforms and single-joint forward kinematics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ir import JointSpec, PartGeometry

# A rotation matrix must satisfy R^T R = I and det R = +1 within this tolerance.
ORTHONORMAL_TOL = 1e-9


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion p -> R p + t with a validated rotation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float)
        t = np.array(self.translation, dtype=float).reshape(3)
        if R.shape != (3, 3):
            raise ValueError("rotation must be a 3x3 matrix")
        if not np.isfinite(R).all() or not np.isfinite(t).all():
            raise ValueError("transform entries must be finite")
        if np.abs(R.T @ R - np.eye(3)).max() > ORTHONORMAL_TOL:
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(R) < 0.0:
            raise ValueError("rotation must be proper (det +1)")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    def apply(self, points) -> np.ndarray:
        """Transform one point (3,) or a point set (N, 3)."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def compose(self, first: "RigidTransform") -> "RigidTransform":
        """Return the transform applying ``first`` and then ``self``."""
        return RigidTransform(self.rotation @ first.rotation,
                              self.rotation @ first.translation + self.translation)

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation)


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Rotation matrix for a right-handed turn of ``angle`` radians about ``axis``."""
    a = np.asarray(axis, dtype=float).reshape(3)
    n = np.linalg.norm(a)
    if n == 0.0 or not np.isfinite(n):
        raise ValueError("rotation axis must be a nonzero finite vector")
    a = a / n
    K = np.array([[0.0, -a[2], a[1]],
                  [a[2], 0.0, -a[0]],
                  [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rotation_angle(R) -> float:
    """Geodesic angle of a rotation matrix, in [0, pi].

    Computed as atan2 of the skew norm against the trace, which stays accurate
    for tiny angles where arccos of the trace alone loses half the digits.
    """
    M = np.asarray(R, dtype=float)
    w = np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])
    sin_t = 0.5 * np.linalg.norm(w)
    cos_t = 0.5 * (np.trace(M) - 1.0)
    return float(np.arctan2(sin_t, cos_t))


def joint_transform(joint: JointSpec, state: float) -> RigidTransform:
    """Rigid transform moving a part from joint state 0 to ``state``.

    Fixed joints yield the identity, prismatic joints translate along the
    axis, revolute joints rotate about the axis through the origin.
    """
    if joint.joint_type == "fixed":
        return RigidTransform.identity()
    if joint.joint_type == "prismatic":
        a = np.asarray(joint.axis, dtype=float)
        n = np.linalg.norm(a)
        if n == 0.0:
            raise ValueError("prismatic joint axis must be nonzero")
        return RigidTransform(np.eye(3), float(state) * a / n)
    if joint.joint_type == "revolute":
        if joint.origin is None:
            raise ValueError("revolute joint needs an origin")
        R = rotation_about_axis(joint.axis, float(state))
        o = np.asarray(joint.origin, dtype=float)
        return RigidTransform(R, o - R @ o)
    raise ValueError(f"unknown joint type {joint.joint_type!r}")


def apply_joint(joint: JointSpec, state: float, geometry: PartGeometry) -> PartGeometry:
    """Move a part's geometry to the given joint state; faces are untouched."""
    T = joint_transform(joint, state)
    return PartGeometry(T.apply(geometry.points), geometry.faces)


def clamp_state(joint: JointSpec, state: float) -> float:
    """Clamp a joint state to the joint's declared range."""
    if joint.joint_type == "fixed":
        raise ValueError("fixed joint has no state to clamp")
    if joint.range is None:
        raise ValueError("joint has no declared range")
    lo, hi = joint.range
    return min(max(float(state), lo), hi)
