"""Evaluation bundles: paired ground-truth and prediction directory trees.

A bundle holds one subdirectory per video, each carrying any subset of the
five modalities: 2-D part masks (masks/<role>/<frame>.pgm|.json), part point
clouds (<role>.xyz|.ply|.obj), a joint document (joint.json), a template
label document (template.json), and a camera trajectory (camera.csv). The
prediction tree mirrors the layout. Evaluation aggregates every modality
present in the ground truth and renders a text report, delimited rows, a
JSON payload, and distribution figures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assetio import (MaskImage, format_real, load_mask, load_pointcloud,
                      mask_format_for, parse_joint_document,
                      parse_template_document, pointcloud_format_for)
from .errors import FileFormatError
from .kinematics import RigidTransform
from .metrics import (ArticulationSummary, CameraTrajectoryPair,
                      JointPrediction, SegRecord, TemplateAccuracy,
                      TemplatePrediction,
                      articulation_summary, camera_pose_error, chamfer_sq,
                      median, record_mean_iou, segmentation_summary,
                      template_accuracy)

CAMERA_HEADER = "frame,qw,qx,qy,qz,tx,ty,tz"

_ROLE_ORDER = {"receptor": 0, "effector": 1}


def _role_sort_key(role: str):
    return (_ROLE_ORDER.get(role, 2), role)


def parse_camera_trajectory(text: str, path: str | None = None) -> tuple[RigidTransform, ...]:
    """Parse a world-from-camera trajectory CSV with unit-quaternion rotations."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != CAMERA_HEADER:
        raise FileFormatError(f"first line must be the header {CAMERA_HEADER!r}", path, 1)
    poses = []
    prev_frame = None
    for lineno, line in enumerate(lines[1:], 2):
        s = line.strip()
        if not s:
            continue
        toks = s.split(",")
        if len(toks) != 8:
            raise FileFormatError("expected 8 comma-separated fields", path, lineno)
        try:
            vals = [float(t) for t in toks]
        except ValueError:
            raise FileFormatError("field is not a real number", path, lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise FileFormatError("fields must be finite", path, lineno)
        frame, qw, qx, qy, qz, tx, ty, tz = vals
        if prev_frame is not None and frame <= prev_frame:
            raise FileFormatError("frame ids must be strictly increasing", path, lineno)
        prev_frame = frame
        n = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
        if n == 0.0:
            raise FileFormatError("zero quaternion", path, lineno)
        w, x, y, z = qw / n, qx / n, qy / n, qz / n
        R = np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])
        poses.append(RigidTransform(R, np.array([tx, ty, tz])))
    if len(poses) < 1:
        raise FileFormatError("trajectory has no poses", path)
    return tuple(poses)


def write_camera_trajectory(poses) -> str:
    """Render poses as the trajectory CSV; rotations become unit quaternions."""
    lines = [CAMERA_HEADER]
    for i, T in enumerate(poses):
        R = T.rotation
        # Shepperd's method: pick the largest of the four squared components.
        tr = float(np.trace(R))
        if tr > 0:
            s = math.sqrt(tr + 1.0) * 2
            qw = 0.25 * s
            qx = (R[2, 1] - R[1, 2]) / s
            qy = (R[0, 2] - R[2, 0]) / s
            qz = (R[1, 0] - R[0, 1]) / s
        elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
            s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
            qw = (R[2, 1] - R[1, 2]) / s
            qx = 0.25 * s
            qy = (R[0, 1] + R[1, 0]) / s
            qz = (R[0, 2] + R[2, 0]) / s
        elif R[1, 1] > R[2, 2]:
            s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
            qw = (R[0, 2] - R[2, 0]) / s
            qx = (R[0, 1] + R[1, 0]) / s
            qy = 0.25 * s
            qz = (R[1, 2] + R[2, 1]) / s
        else:
            s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
            qw = (R[1, 0] - R[0, 1]) / s
            qx = (R[0, 2] + R[2, 0]) / s
            qy = (R[1, 2] + R[2, 1]) / s
            qz = 0.25 * s
        t = T.translation
        fields = [float(i), qw, qx, qy, qz, t[0], t[1], t[2]]
        lines.append(",".join(format_real(v) for v in fields))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReconstructionSummary:
    """Median squared chamfer distances per role and pooled."""

    median_by_role: dict
    median_total: float
    n_records: int
    n_missing: int


@dataclass(frozen=True)
class CameraSummary:
    """Dataset-level camera error: per-video means averaged with equal weight."""

    rotation_rad: float
    translation_m: float
    n_trajectories: int


@dataclass
class BundleResult:
    """Everything evaluate_bundle measured, summaries plus per-record detail."""

    seg_records: list       # (video, role, mean_iou)
    segmentation: dict | None
    recon_records: list     # (video, role, chamfer_sq)
    reconstruction: ReconstructionSummary | None
    camera_records: list    # (video, CameraPoseError)
    camera: CameraSummary | None
    joint_records: list     # (video, JointPrediction)
    articulation: ArticulationSummary | None
    template_records: list  # (video, TemplatePrediction)
    template: TemplateAccuracy | None
    notices: list


def _find_pointcloud(directory: Path, role: str) -> Path | None:
    for suffix in (".xyz", ".ply", ".obj"):
        candidate = directory / f"{role}{suffix}"
        if candidate.is_file():
            return candidate
    return None


def _find_mask(directory: Path, stem: str) -> Path | None:
    for suffix in (".pgm", ".json"):
        candidate = directory / f"{stem}{suffix}"
        if candidate.is_file():
            return candidate
    return None


def _empty_like(mask: MaskImage) -> MaskImage:
    return MaskImage(np.zeros((mask.height, mask.width), dtype=bool))


def evaluate_bundle(gt_dir, pred_dir) -> BundleResult:
    """Score a prediction tree against a ground-truth tree.

    Modalities absent from the ground truth are skipped with a notice; absent
    predictions count as failures where the metric has failure semantics
    (articulation), as empty masks for segmentation, and as skips with a
    notice for reconstruction, templates, and cameras.
    """
    gt_root = Path(gt_dir)
    pred_root = Path(pred_dir)
    videos = sorted(p.name for p in gt_root.iterdir() if p.is_dir())
    if not videos:
        raise ValueError(f"ground-truth bundle {gt_root} has no video directories")

    notices: list[str] = []
    seg_metric_records: list[SegRecord] = []
    seg_records = []
    recon_records = []
    n_recon_missing = 0
    camera_records = []
    joint_records = []
    template_records = []

    for video in videos:
        gv = gt_root / video
        pv = pred_root / video

        mask_root = gv / "masks"
        if mask_root.is_dir():
            for role_dir in sorted(mask_root.iterdir()):
                if not role_dir.is_dir():
                    continue
                role = role_dir.name
                frames = []
                for gt_file in sorted(role_dir.iterdir()):
                    fmt = mask_format_for(gt_file)
                    if fmt is None:
                        continue
                    gt_mask = load_mask(gt_file, fmt)
                    stem = gt_file.name[:gt_file.name.rfind(".")]
                    pred_file = _find_mask(pv / "masks" / role, stem) if (
                        pv / "masks" / role).is_dir() else None
                    if pred_file is None:
                        pred_mask = _empty_like(gt_mask)
                    else:
                        pred_mask = load_mask(pred_file, mask_format_for(pred_file))
                    frames.append((pred_mask, gt_mask))
                if frames:
                    rec = SegRecord(role=role, frames=tuple(frames))
                    seg_metric_records.append(rec)
                    seg_records.append((video, role, record_mean_iou(rec)))

        for role in ("receptor", "effector"):
            gt_pc = _find_pointcloud(gv, role)
            if gt_pc is None:
                continue
            pred_pc = _find_pointcloud(pv, role) if pv.is_dir() else None
            if pred_pc is None:
                notices.append(f"reconstruction: no {role} prediction for video {video!r}")
                n_recon_missing += 1
                continue
            gt_geom = load_pointcloud(gt_pc, pointcloud_format_for(gt_pc))
            pred_geom = load_pointcloud(pred_pc, pointcloud_format_for(pred_pc))
            recon_records.append((video, role, chamfer_sq(pred_geom.points, gt_geom.points)))

        gt_joint = gv / "joint.json"
        if gt_joint.is_file():
            truth = parse_joint_document(gt_joint.read_text(encoding="utf-8"))
            pred_joint = pv / "joint.json"
            predicted = (parse_joint_document(pred_joint.read_text(encoding="utf-8"))
                         if pred_joint.is_file() else None)
            joint_records.append((video, JointPrediction(predicted=predicted,
                                                         ground_truth=truth)))

        gt_tpl = gv / "template.json"
        if gt_tpl.is_file():
            truth_labels = parse_template_document(gt_tpl.read_text(encoding="utf-8"))
            pred_tpl = pv / "template.json"
            if pred_tpl.is_file():
                pred_labels = parse_template_document(pred_tpl.read_text(encoding="utf-8"))
                template_records.append((video, TemplatePrediction(
                    predicted=pred_labels, ground_truth=truth_labels)))
            else:
                notices.append(f"template: no prediction for video {video!r}; skipped")

        gt_cam = gv / "camera.csv"
        if gt_cam.is_file():
            truth_traj = parse_camera_trajectory(gt_cam.read_text(encoding="utf-8"),
                                                 str(gt_cam))
            pred_cam = pv / "camera.csv"
            if not pred_cam.is_file():
                notices.append(f"camera: no prediction for video {video!r}; skipped")
            else:
                pred_traj = parse_camera_trajectory(pred_cam.read_text(encoding="utf-8"),
                                                    str(pred_cam))
                if len(pred_traj) != len(truth_traj):
                    notices.append(f"camera: length mismatch for video {video!r}; skipped")
                else:
                    err = camera_pose_error(CameraTrajectoryPair(predicted=pred_traj,
                                                                 ground_truth=truth_traj))
                    camera_records.append((video, err))

    segmentation = segmentation_summary(seg_metric_records) if seg_metric_records else None
    if segmentation is None:
        notices.append("segmentation: no ground-truth masks in bundle")

    reconstruction = None
    if recon_records:
        by_role: dict[str, list[float]] = {}
        for _, role, cd in recon_records:
            by_role.setdefault(role, []).append(cd)
        reconstruction = ReconstructionSummary(
            median_by_role={role: median(v) for role, v in sorted(
                by_role.items(), key=lambda kv: _role_sort_key(kv[0]))},
            median_total=median([cd for _, _, cd in recon_records]),
            n_records=len(recon_records),
            n_missing=n_recon_missing)
    elif n_recon_missing == 0:
        notices.append("reconstruction: no ground-truth point clouds in bundle")

    camera = None
    if camera_records:
        rot = [e.rotation_rad for _, e in camera_records]
        trans = [e.translation_m for _, e in camera_records]
        camera = CameraSummary(rotation_rad=sum(rot) / len(rot),
                               translation_m=sum(trans) / len(trans),
                               n_trajectories=len(camera_records))
    elif not any(n.startswith("camera:") for n in notices):
        notices.append("camera: no ground-truth trajectories in bundle")

    articulation = (articulation_summary([r for _, r in joint_records])
                    if joint_records else None)
    if articulation is None:
        notices.append("articulation: no ground-truth joints in bundle")

    template = (template_accuracy([r for _, r in template_records])
                if template_records else None)
    if template is None and not any(n.startswith("template:") for n in notices):
        notices.append("template: no ground-truth labels in bundle")

    return BundleResult(seg_records=seg_records, segmentation=segmentation,
                        recon_records=recon_records, reconstruction=reconstruction,
                        camera_records=camera_records, camera=camera,
                        joint_records=joint_records, articulation=articulation,
                        template_records=template_records, template=template,
                        notices=notices)


# ---------------------------------------------------------------------------
# rendering

def _fmt_pct(v) -> str:
    return "n/a" if v is None else f"{v:.2f}"


def _fmt_err(v) -> str:
    return "n/a" if v is None else f"{v:.6f}"


def _table(headers: list[str], rows: list[list[str]]) -> list[str]:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    out = ["  ".join(h.ljust(widths[i]) if i == 0 else h.rjust(widths[i])
                     for i, h in enumerate(headers)).rstrip()]
    for row in rows:
        out.append("  ".join(cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                             for i, cell in enumerate(row)).rstrip())
    return out


def render_report(result: BundleResult) -> str:
    """Human-readable evaluation report, one section per modality."""
    lines = ["interactive-object evaluation report",
             "===================================="]

    if result.segmentation is not None:
        lines += ["", "[segmentation]"]
        rows = []
        roles = sorted(result.segmentation, key=_role_sort_key)
        for role in roles:
            s = result.segmentation[role]
            rows.append([role, f"{100.0 * s.mean_iou:.2f}", f"{100.0 * s.success_rate:.2f}",
                         str(s.n_records)])
        all_ious = [iou for _, _, iou in result.seg_records]
        successes = sum(1 for v in all_ious if v > 0.5)
        rows.append(["average", f"{100.0 * sum(all_ious) / len(all_ious):.2f}",
                     f"{100.0 * successes / len(all_ious):.2f}", str(len(all_ious))])
        lines += _table(["role", "iou_pct", "success_pct", "records"], rows)

    if result.reconstruction is not None:
        r = result.reconstruction
        lines += ["", "[reconstruction]"]
        rows = [[role, _fmt_err(cd)] for role, cd in r.median_by_role.items()]
        rows.append(["total", _fmt_err(r.median_total)])
        lines += _table(["part", "median_cd_m2"], rows)
        lines.append(f"records: {r.n_records}  missing predictions: {r.n_missing}")

    if result.camera is not None:
        c = result.camera
        lines += ["", "[camera_pose]"]
        lines += _table(["rotation_err_rad", "translation_err_m", "trajectories"],
                        [[_fmt_err(c.rotation_rad), _fmt_err(c.translation_m),
                          str(c.n_trajectories)]])

    if result.articulation is not None:
        a = result.articulation
        lines += ["", "[articulation]"]
        lines += _table(
            ["axis_err_rad", "origin_err_m", "type_acc_pct", "failure_pct", "records"],
            [[_fmt_err(a.axis_error_rad), _fmt_err(a.origin_error_m),
              _fmt_pct(a.type_accuracy_pct), _fmt_pct(a.failure_rate_pct),
              str(a.n_records)]])

    if result.template is not None:
        t = result.template
        lines += ["", "[function_template]"]
        lines += _table(["effect_acc_pct", "mapping_acc_pct", "overall_acc_pct", "records"],
                        [[_fmt_pct(t.effect_pct), _fmt_pct(t.mapping_pct),
                          _fmt_pct(t.overall_pct), str(t.n_records)]])

    if result.notices:
        lines += ["", "[notices]"]
        lines += [f"- {n}" for n in result.notices]

    return "\n".join(lines) + "\n"


def result_to_csv_rows(result: BundleResult) -> list[tuple[str, str, str]]:
    """Delimited summary rows (section, metric, value); undefined metrics are omitted."""
    rows: list[tuple[str, str, str]] = []

    def put(section, metric, value):
        if value is None:
            return
        rows.append((section, metric, value if isinstance(value, str) else format_real(value)))

    if result.segmentation is not None:
        for role in sorted(result.segmentation, key=_role_sort_key):
            s = result.segmentation[role]
            put("segmentation", f"{role}_mean_iou", s.mean_iou)
            put("segmentation", f"{role}_success_rate", s.success_rate)
            put("segmentation", f"{role}_records", s.n_records)
    if result.reconstruction is not None:
        r = result.reconstruction
        for role, cd in r.median_by_role.items():
            put("reconstruction", f"{role}_median_cd_m2", cd)
        put("reconstruction", "total_median_cd_m2", r.median_total)
        put("reconstruction", "records", r.n_records)
        put("reconstruction", "missing_predictions", r.n_missing)
    if result.camera is not None:
        put("camera_pose", "rotation_err_rad", result.camera.rotation_rad)
        put("camera_pose", "translation_err_m", result.camera.translation_m)
        put("camera_pose", "trajectories", result.camera.n_trajectories)
    if result.articulation is not None:
        a = result.articulation
        put("articulation", "axis_err_rad", a.axis_error_rad)
        put("articulation", "origin_err_m", a.origin_error_m)
        put("articulation", "type_accuracy_pct", a.type_accuracy_pct)
        put("articulation", "failure_rate_pct", a.failure_rate_pct)
        put("articulation", "records", a.n_records)
    if result.template is not None:
        t = result.template
        put("function_template", "effect_acc_pct", t.effect_pct)
        put("function_template", "mapping_acc_pct", t.mapping_pct)
        put("function_template", "overall_acc_pct", t.overall_pct)
        put("function_template", "records", t.n_records)
    return rows


def result_to_json(result: BundleResult) -> dict:
    """JSON-ready payload mirroring the report, with full-precision numbers."""
    payload: dict = {"notices": list(result.notices)}
    if result.segmentation is None:
        payload["segmentation"] = None
    else:
        payload["segmentation"] = {
            "roles": {role: {"mean_iou": s.mean_iou, "success_rate": s.success_rate,
                             "n_records": s.n_records}
                      for role, s in sorted(result.segmentation.items(),
                                            key=lambda kv: _role_sort_key(kv[0]))},
            "records": [{"video": v, "role": r, "mean_iou": iou}
                        for v, r, iou in result.seg_records],
        }
    if result.reconstruction is None:
        payload["reconstruction"] = None
    else:
        r = result.reconstruction
        payload["reconstruction"] = {
            "median_by_role": dict(r.median_by_role),
            "median_total": r.median_total,
            "n_records": r.n_records,
            "n_missing": r.n_missing,
            "records": [{"video": v, "role": role, "chamfer_sq": cd}
                        for v, role, cd in result.recon_records],
        }
    if result.camera is None:
        payload["camera_pose"] = None
    else:
        payload["camera_pose"] = {
            "rotation_err_rad": result.camera.rotation_rad,
            "translation_err_m": result.camera.translation_m,
            "n_trajectories": result.camera.n_trajectories,
            "records": [{"video": v, "rotation_err_rad": e.rotation_rad,
                         "translation_err_m": e.translation_m, "n_poses": e.n_poses}
                        for v, e in result.camera_records],
        }
    if result.articulation is None:
        payload["articulation"] = None
    else:
        a = result.articulation
        payload["articulation"] = {
            "axis_err_rad": a.axis_error_rad,
            "origin_err_m": a.origin_error_m,
            "type_accuracy_pct": a.type_accuracy_pct,
            "failure_rate_pct": a.failure_rate_pct,
            "n_records": a.n_records,
            "n_failures": a.n_failures,
        }
    if result.template is None:
        payload["function_template"] = None
    else:
        t = result.template
        payload["function_template"] = {
            "effect_acc_pct": t.effect_pct,
            "mapping_acc_pct": t.mapping_pct,
            "overall_acc_pct": t.overall_pct,
            "n_records": t.n_records,
        }
    return payload


def render_figures(result: BundleResult, out_dir) -> list[str]:
    """Write distribution figures for the modalities present; returns paths written."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    role_colors = {"receptor": "tab:blue", "effector": "tab:orange"}

    if result.seg_records:
        fig, ax = plt.subplots(figsize=(7, 4))
        labels = [f"{v}/{r}" for v, r, _ in result.seg_records]
        values = [iou for _, _, iou in result.seg_records]
        colors = [role_colors.get(r, "tab:gray") for _, r, _ in result.seg_records]
        ax.bar(range(len(values)), values, color=colors)
        ax.axhline(0.5, color="black", linestyle="--", linewidth=1, label="success gate")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("mean IoU")
        ax.set_title("segmentation IoU per record")
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        path = out / "segmentation_iou.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(str(path))

    if result.recon_records:
        fig, ax = plt.subplots(figsize=(7, 4))
        by_role: dict[str, list[float]] = {}
        for _, role, cd in result.recon_records:
            by_role.setdefault(role, []).append(cd)
        for role in sorted(by_role, key=_role_sort_key):
            vals = by_role[role]
            color = role_colors.get(role, "tab:gray")
            ax.hist(vals, bins=min(20, max(5, len(vals))), alpha=0.55,
                    color=color, label=role)
            ax.axvline(median(vals), color=color, linestyle="--", linewidth=1)
        ax.set_xlabel("squared chamfer distance (m^2)")
        ax.set_ylabel("records")
        ax.set_title("reconstruction error distribution (dashed: medians)")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out / "chamfer_distribution.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(str(path))

    if result.articulation is not None:
        a = result.articulation
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 4))
        pct_labels = ["type acc", "failure"]
        pct_values = [a.type_accuracy_pct or 0.0, a.failure_rate_pct]
        ax1.bar(pct_labels, pct_values, color=["tab:green", "tab:red"])
        ax1.set_ylim(0, 105)
        ax1.set_ylabel("percent")
        ax1.set_title("articulation rates")
        err_labels = ["axis (rad)", "origin (m)"]
        err_values = [a.axis_error_rad or 0.0, a.origin_error_m or 0.0]
        ax2.bar(err_labels, err_values, color=["tab:blue", "tab:orange"])
        ax2.set_ylabel("mean error")
        ax2.set_title("articulation errors")
        fig.tight_layout()
        path = out / "articulation_summary.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(str(path))

    if result.template is not None:
        t = result.template
        fig, ax = plt.subplots(figsize=(5, 4))
        names = ["effect", "mapping", "overall"]
        values = [t.effect_pct, t.mapping_pct, t.overall_pct]
        ax.bar(names, values, color="tab:purple")
        for i, v in enumerate(values):
            ax.text(i, v + 1, f"{v:.1f}", ha="center", fontsize=9)
        ax.set_ylim(0, 110)
        ax.set_ylabel("accuracy (%)")
        ax.set_title(f"template recognition ({t.n_records} records)")
        fig.tight_layout()
        path = out / "template_accuracy.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(str(path))

    return written
