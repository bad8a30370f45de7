"""Evaluation metrics for predicted parts, joints, templates, and cameras.

Pure operations over in-memory records; bundle loading and report rendering
live in ``evalbundle``. Counts are exact integers, aggregate means are plain
sums over counts, and every rate is documented as a fraction or a percentage
in its field name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError
from .ir import EFFECT_KINDS, MAPPING_KINDS, JointSpec
from .kinematics import rotation_angle

# A segmentation record counts as a success when its mean IoU strictly
# exceeds this gate.
SUCCESS_IOU_GATE = 0.5


def _as_mask_array(mask) -> np.ndarray:
    pixels = getattr(mask, "pixels", mask)
    arr = np.asarray(pixels, dtype=bool)
    if arr.ndim != 2:
        raise ValueError("mask must be a 2-D array")
    return arr


def iou_2d(predicted, truth) -> float:
    """Intersection over union of two equally shaped binary masks.

    Two empty masks agree perfectly and score 1.0.
    """
    a = _as_mask_array(predicted)
    b = _as_mask_array(truth)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    return inter / union


def iou_3d(predicted_indices, truth_indices, n_points: int) -> float:
    """Intersection over union of two point-index selections out of n_points."""
    if n_points < 1:
        raise ValueError("n_points must be positive")
    a = set(predicted_indices)
    b = set(truth_indices)
    for idx in (a | b):
        if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0 or idx >= n_points:
            raise ValueError(f"index {idx!r} outside [0, {n_points})")
    union = len(a | b)
    if union == 0:
        return 1.0
    return len(a & b) / union


@dataclass(frozen=True)
class SegRecord:
    """One segmented part track: a role plus (predicted, truth) mask pairs per frame."""

    role: str
    frames: tuple


@dataclass(frozen=True)
class RoleSegmentation:
    """Per-role aggregate: mean record IoU and the fraction of successful records."""

    mean_iou: float
    success_rate: float
    n_records: int


def record_mean_iou(record: SegRecord) -> float:
    """Mean per-frame IoU of one record."""
    if not record.frames:
        raise ValueError("segmentation record has no frames")
    total = 0.0
    for predicted, truth in record.frames:
        total += iou_2d(predicted, truth)
    return total / len(record.frames)


def segmentation_summary(records) -> dict[str, RoleSegmentation]:
    """Aggregate segmentation records by role.

    A record succeeds when its mean IoU strictly exceeds the 0.5 gate.
    """
    if not records:
        raise ValueError("no segmentation records")
    by_role: dict[str, list[float]] = {}
    for rec in records:
        by_role.setdefault(rec.role, []).append(record_mean_iou(rec))
    out = {}
    for role, ious in by_role.items():
        successes = sum(1 for v in ious if v > SUCCESS_IOU_GATE)
        out[role] = RoleSegmentation(mean_iou=sum(ious) / len(ious),
                                     success_rate=successes / len(ious),
                                     n_records=len(ious))
    return out


def median(values) -> float:
    """Sorted midpoint; an even count averages the two middle values."""
    vals = sorted(float(v) for v in values)
    if not vals:
        raise ValueError("median of an empty sequence")
    n = len(vals)
    if n % 2 == 1:
        return vals[n // 2]
    return (vals[n // 2 - 1] + vals[n // 2]) / 2.0


def _directional_mean_sq(a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    # Chunk rows so the pairwise distance matrix stays bounded in memory.
    step = max(1, 2_000_000 // b.shape[0])
    for i in range(0, a.shape[0], step):
        chunk = a[i:i + step]
        d2 = ((chunk[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        total += float(d2.min(axis=1).sum())
    return total / a.shape[0]


def chamfer_sq(a, b) -> float:
    """Symmetric squared chamfer distance between two point sets.

    Sum of the two directional means of squared nearest-neighbor distances;
    a pair of single points one meter apart scores 2.0.
    """
    pa = np.asarray(a, dtype=float)
    pb = np.asarray(b, dtype=float)
    for name, arr in (("first", pa), ("second", pb)):
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
            raise ValueError(f"{name} point set must be a nonempty (N, 3) array")
    return _directional_mean_sq(pa, pb) + _directional_mean_sq(pb, pa)


@dataclass(frozen=True)
class JointPrediction:
    """One articulation record; ``predicted`` is None when estimation failed."""

    predicted: JointSpec | None
    ground_truth: JointSpec


def joint_axis_error(predicted: JointSpec, truth: JointSpec) -> float:
    """Undirected angle in radians between two joint axes; both must be non-fixed."""
    if predicted.joint_type == "fixed" or truth.joint_type == "fixed":
        raise ValueError("fixed joints have no axis to compare")
    a = np.asarray(predicted.axis, dtype=float)
    b = np.asarray(truth.axis, dtype=float)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("joint axis has zero length")
    cos_t = abs(float(a @ b)) / (na * nb)
    return math.acos(min(cos_t, 1.0))


def joint_origin_error(predicted: JointSpec, truth: JointSpec) -> float:
    """Distance in meters from the predicted origin to the true axis line.

    The true axis slides freely through its own origin, so only the
    perpendicular offset is an error; both joints must be revolute.
    """
    if predicted.joint_type != "revolute" or truth.joint_type != "revolute":
        raise ValueError("origin error is defined for revolute joints only")
    if predicted.origin is None or truth.origin is None:
        raise ValueError("revolute joints need origins to compare")
    axis = np.asarray(truth.axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("true joint axis has zero length")
    axis = axis / n
    d = np.asarray(predicted.origin, dtype=float) - np.asarray(truth.origin, dtype=float)
    perp = d - float(d @ axis) * axis
    return float(np.linalg.norm(perp))


@dataclass(frozen=True)
class ArticulationSummary:
    """Aggregate articulation quality; None marks fields with no defined records."""

    axis_error_rad: float | None
    origin_error_m: float | None
    type_accuracy_pct: float | None
    failure_rate_pct: float
    n_records: int
    n_failures: int
    n_axis: int
    n_origin: int


def articulation_summary(records) -> ArticulationSummary:
    """Aggregate joint predictions.

    Records without a prediction count only toward the failure rate; the
    error means and type accuracy are computed over the records where the
    quantities are defined (axis: both non-fixed, origin: both revolute).
    """
    records = list(records)
    if not records:
        raise ValueError("no articulation records")
    present = [r for r in records if r.predicted is not None]
    n_failures = len(records) - len(present)

    type_acc = None
    if present:
        hits = sum(1 for r in present
                   if r.predicted.joint_type == r.ground_truth.joint_type)
        type_acc = 100.0 * hits / len(present)

    axis_errs = [joint_axis_error(r.predicted, r.ground_truth) for r in present
                 if r.predicted.joint_type != "fixed"
                 and r.ground_truth.joint_type != "fixed"]
    origin_errs = [joint_origin_error(r.predicted, r.ground_truth) for r in present
                   if r.predicted.joint_type == "revolute"
                   and r.ground_truth.joint_type == "revolute"
                   and r.predicted.origin is not None
                   and r.ground_truth.origin is not None]

    return ArticulationSummary(
        axis_error_rad=sum(axis_errs) / len(axis_errs) if axis_errs else None,
        origin_error_m=sum(origin_errs) / len(origin_errs) if origin_errs else None,
        type_accuracy_pct=type_acc,
        failure_rate_pct=100.0 * n_failures / len(records),
        n_records=len(records),
        n_failures=n_failures,
        n_axis=len(axis_errs),
        n_origin=len(origin_errs))


@dataclass(frozen=True)
class TemplatePrediction:
    """Predicted and true (effect kind, mapping kind) labels for one object."""

    predicted: tuple[str, str]
    ground_truth: tuple[str, str]


@dataclass(frozen=True)
class TemplateAccuracy:
    """Percent accuracy of effect kind, mapping kind, and the joint label."""

    effect_pct: float
    mapping_pct: float
    overall_pct: float
    n_records: int


def template_accuracy(records) -> TemplateAccuracy:
    """Fraction of records with the effect, the mapping, and both kinds correct."""
    records = list(records)
    if not records:
        raise ValueError("no template records")
    for r in records:
        for effect, mapping in (r.predicted, r.ground_truth):
            if effect not in EFFECT_KINDS:
                raise ValueError(f"unknown effect kind {effect!r}")
            if mapping not in MAPPING_KINDS:
                raise ValueError(f"unknown mapping kind {mapping!r}")
    n = len(records)
    effect_hits = sum(1 for r in records if r.predicted[0] == r.ground_truth[0])
    mapping_hits = sum(1 for r in records if r.predicted[1] == r.ground_truth[1])
    both_hits = sum(1 for r in records if r.predicted == r.ground_truth)
    return TemplateAccuracy(effect_pct=100.0 * effect_hits / n,
                            mapping_pct=100.0 * mapping_hits / n,
                            overall_pct=100.0 * both_hits / n,
                            n_records=n)


@dataclass(frozen=True)
class CameraTrajectoryPair:
    """Predicted and true camera poses (world-from-camera), frame-aligned."""

    predicted: tuple
    ground_truth: tuple


@dataclass(frozen=True)
class CameraPoseError:
    """Mean rotation and translation error of a trajectory after alignment."""

    rotation_rad: float
    translation_m: float
    n_poses: int


def _umeyama(src: np.ndarray, dst: np.ndarray):
    """Similarity (s, R, t) minimizing ||dst - (s R src + t)||^2."""
    n = src.shape[0]
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    xs = src - mu_s
    xd = dst - mu_d
    var_s = float((xs ** 2).sum()) / n
    var_d = float((xd ** 2).sum()) / n
    if var_s == 0.0 or var_d == 0.0:
        raise DegenerateGeometryError("camera centers are coincident; alignment undefined")
    H = xd.T @ xs / n
    U, D, Vt = np.linalg.svd(H)
    S = np.eye(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0.0:
        S[2, 2] = -1.0
    R = U @ S @ Vt
    scale = float((D * np.diag(S)).sum()) / var_s
    t = mu_d - scale * (R @ mu_s)
    return scale, R, t


def camera_pose_error(pair: CameraTrajectoryPair) -> CameraPoseError:
    """Mean pose error after a global similarity alignment of the camera centers.

    The predicted trajectory is aligned onto the truth with the least-squares
    similarity over camera centers; rotation error is the geodesic angle
    between the aligned predicted rotation and the truth, translation error
    the distance between camera centers.
    """
    pred = list(pair.predicted)
    truth = list(pair.ground_truth)
    if len(pred) != len(truth):
        raise ValueError("trajectories differ in length")
    if len(pred) < 2:
        raise ValueError("alignment needs at least 2 poses")
    centers_p = np.array([T.translation for T in pred])
    centers_g = np.array([T.translation for T in truth])
    scale, R, t = _umeyama(centers_p, centers_g)
    rot_total = 0.0
    trans_total = 0.0
    for Tp, Tg in zip(pred, truth):
        aligned_R = R @ Tp.rotation
        rot_total += rotation_angle(Tg.rotation @ aligned_R.T)
        aligned_c = scale * (R @ Tp.translation) + t
        trans_total += float(np.linalg.norm(Tg.translation - aligned_c))
    n = len(pred)
    return CameraPoseError(rotation_rad=rot_total / n, translation_m=trans_total / n, n_poses=n)
