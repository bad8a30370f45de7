"""Joint estimation from observed part poses.

Fits rigid motions between corresponding point sets (SVD orthogonal
Procrustes with the reflection guard), decomposes a rigid motion into its
screw form, and reduces a sequence of observations of one moving part to a
single joint estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, HelicalMotionError
from .ir import JointSpec
from .kinematics import RigidTransform

# Rotations below TOL_ROT radians are treated as no rotation; translations
# below TOL_TRANS meters as no translation.
DEFAULT_TOL_ROT = 1e-3
DEFAULT_TOL_TRANS = 1e-4

# Placeholder direction reported for fixed joints, which have no real axis.
FIXED_AXIS = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ScrewDecomposition:
    """Screw form of a rigid motion.

    kind 'fixed' has no axis; 'prismatic' slides magnitude meters along axis;
    'revolute' turns magnitude radians about the axis through origin.
    """

    kind: str
    axis: tuple[float, float, float] | None
    origin: tuple[float, float, float] | None
    magnitude: float


def fit_rigid(source, target) -> RigidTransform:
    """Least-squares rigid motion carrying ``source`` points onto ``target``.

    Point sets must correspond row by row. Raises DegenerateGeometryError when
    the points are coincident or collinear, which leaves the rotation
    unconstrained.
    """
    p = np.asarray(source, dtype=float)
    q = np.asarray(target, dtype=float)
    if p.ndim != 2 or p.shape[1] != 3 or p.shape != q.shape:
        raise ValueError("point sets must share a common (N, 3) shape")
    if p.shape[0] < 3:
        raise ValueError("rigid fit needs at least 3 points")
    cp = p.mean(axis=0)
    cq = q.mean(axis=0)
    H = (p - cp).T @ (q - cq)
    U, S, Vt = np.linalg.svd(H)
    if S[1] <= max(S[0], 1e-30) * 1e-9:
        raise DegenerateGeometryError("points are coincident or collinear; rotation unconstrained")
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    return RigidTransform(R, cq - R @ cp)


def _rotation_axis_angle(R: np.ndarray) -> tuple[np.ndarray, float]:
    """Axis and angle of a rotation matrix; angle in [0, pi], stable at both ends."""
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    sin_t = 0.5 * np.linalg.norm(w)
    cos_t = 0.5 * (np.trace(R) - 1.0)
    theta = math.atan2(sin_t, cos_t)
    if sin_t > 1e-6:
        axis = w / (2.0 * sin_t)
    else:
        # Near pi the skew part vanishes; recover the axis from the symmetric
        # part, R + I = 2 a a^T + (1 + cos) (I - a a^T) ~ 2 a a^T.
        M = (R + np.eye(3)) / 2.0
        j = int(np.argmax(np.diag(M)))
        col = M[:, j]
        nrm = math.sqrt(max(M[j, j], 0.0))
        if nrm == 0.0:
            return np.array([0.0, 0.0, 1.0]), theta
        axis = col / nrm
        s = float(w @ axis)
        if s < 0.0:
            axis = -axis
        elif s == 0.0:
            # Sign is ambiguous at exactly pi; canonicalize it.
            k = int(np.argmax(np.abs(axis)))
            if axis[k] < 0.0:
                axis = -axis
    n = np.linalg.norm(axis)
    return axis / n, theta


def screw_decompose(transform: RigidTransform, tol_rot: float = DEFAULT_TOL_ROT,
                    tol_trans: float = DEFAULT_TOL_TRANS) -> ScrewDecomposition:
    """Classify a rigid motion as fixed, prismatic, or revolute.

    A rotation with a translation component along its own axis is a helical
    motion and raises HelicalMotionError; no single-DOF joint produces it.
    """
    R = transform.rotation
    t = transform.translation
    axis, theta = _rotation_axis_angle(R)
    if theta < tol_rot:
        shift = float(np.linalg.norm(t))
        if shift < tol_trans:
            return ScrewDecomposition("fixed", None, None, 0.0)
        a = t / shift
        return ScrewDecomposition("prismatic", tuple(a.tolist()), None, shift)
    axial = float(t @ axis)
    if abs(axial) > tol_trans:
        raise HelicalMotionError(
            f"motion translates {axial:.6g} m along its own rotation axis")
    t_perp = t - axial * axis
    # Solve (I - R) o = t_perp for the axis point closest to the origin:
    # o = (t_perp + cot(theta/2) (a x t_perp)) / 2.
    half = theta / 2.0
    cot = math.cos(half) / math.sin(half)
    origin = 0.5 * (t_perp + cot * np.cross(axis, t_perp))
    return ScrewDecomposition("revolute", tuple(axis.tolist()), tuple(origin.tolist()), theta)


def _consensus_axis(decomps) -> tuple[np.ndarray, list[float]]:
    """Average the axes after sign alignment; return the axis and signed magnitudes."""
    ref = np.asarray(decomps[0].axis, dtype=float)
    total = np.zeros(3)
    mags = []
    for d in decomps:
        a = np.asarray(d.axis, dtype=float)
        s = 1.0 if float(a @ ref) >= 0.0 else -1.0
        total += s * a
        mags.append(s * d.magnitude)
    n = np.linalg.norm(total)
    if n == 0.0:
        raise DegenerateGeometryError("observed motion axes cancel out")
    return total / n, mags


def fit_joint(observations, tol_rot: float = DEFAULT_TOL_ROT,
              tol_trans: float = DEFAULT_TOL_TRANS) -> JointSpec:
    """Estimate one joint from point sets observed at two or more states.

    Every observation is registered against the first, each relative motion is
    screw-decomposed, and the decompositions are reduced by majority kind
    (ties prefer revolute over prismatic over fixed). The reported range spans
    the signed observed magnitudes and always includes 0, the reference state.
    """
    obs = [np.asarray(o, dtype=float) for o in observations]
    if len(obs) < 2:
        raise ValueError("joint estimation needs at least 2 observations")
    shape = obs[0].shape
    if any(o.shape != shape for o in obs):
        raise ValueError("observations must share one point cardinality")

    decomps = [screw_decompose(fit_rigid(obs[0], o), tol_rot, tol_trans) for o in obs[1:]]
    counts = {k: sum(d.kind == k for d in decomps) for k in ("revolute", "prismatic", "fixed")}
    best = max(counts.values())
    kind = next(k for k in ("revolute", "prismatic", "fixed") if counts[k] == best)

    if kind == "fixed":
        return JointSpec("fixed", FIXED_AXIS, origin=None, range=(0.0, 0.0))

    chosen = [d for d in decomps if d.kind == kind]
    axis, mags = _consensus_axis(chosen)
    lo = min(min(mags), 0.0)
    hi = max(max(mags), 0.0)
    if kind == "prismatic":
        return JointSpec("prismatic", tuple(axis.tolist()), origin=None, range=(lo, hi))

    # Each per-pair origin is only defined up to sliding along the axis;
    # project onto the plane through 0 orthogonal to the consensus axis.
    origins = []
    for d in chosen:
        o = np.asarray(d.origin, dtype=float)
        origins.append(o - float(o @ axis) * axis)
    origin = np.mean(origins, axis=0)
    return JointSpec("revolute", tuple(axis.tolist()), origin=tuple(origin.tolist()),
                     range=(lo, hi))
