"""Toolkit for interactive-object assets built on function templates.

A function template pairs a receptor part (where interaction happens) with an
effector part (where the consequence happens) through a state mapping and a
physical effect. This package parses and validates asset documents, simulates
receptor traces, compiles assets into per-simulator scripts, fits joints from
observed motion, and scores prediction bundles against ground truth.
"""

__version__ = "0.1.0"

from .errors import (CodegenError, DegenerateGeometryError,
                     DocumentSyntaxError, FileFormatError, FunkitError,
                     HelicalMotionError, InvalidAssetError, SchemaError,
                     UnknownTargetError)
from .ir import (AXIS_UNIT_TOL, EFFECT_KINDS, GEOMETRY_FORMATS, JOINT_TYPES,
                 MAPPING_KINDS, PART_ROLES, STATE_UNITS, BinaryMapping,
                 CumulativeMapping, FluidEffect, FunctionTemplate,
                 GeometryEffect, GeometryRef, IlluminationEffect,
                 InteractiveObjectAsset, JointSpec, LinearMapping, Part,
                 PartGeometry, StateSpace, StepMapping, TemperatureEffect,
                 ValidationReport, Violation, classify_mapping, validate_asset)
from .assetio import (MaskImage, format_real, load_mask, load_part_index_masks,
                      load_pointcloud, parse_asset, parse_joint_document,
                      parse_state_trace, parse_template_document, parse_trace,
                      serialize_asset, serialize_joint_document,
                      serialize_template_document, write_mask_pgm,
                      write_mask_rle, write_pointcloud_xyz, write_state_trace,
                      write_trace)
from .kinematics import (RigidTransform, apply_joint, clamp_state,
                         joint_transform, rotation_about_axis, rotation_angle)
from .runtime import (STEP_THRESHOLD_FRACTION, ActuationTrace, StateTrace,
                      derive_linear_slope, derive_step_threshold, eval_mapping,
                      resolve_mapping, run_trace)
from .codegen import (EmittedScript, Target, compute_effect_anchor,
                      emit_script, get_target, list_targets, parse_manifest,
                      script_filename)
from .artfit import (ScrewDecomposition, fit_joint, fit_rigid,
                     screw_decompose)
from .metrics import (SUCCESS_IOU_GATE, ArticulationSummary,
                      CameraPoseError, CameraTrajectoryPair, JointPrediction,
                      RoleSegmentation, SegRecord, TemplateAccuracy,
                      TemplatePrediction, articulation_summary,
                      camera_pose_error, chamfer_sq, iou_2d, iou_3d,
                      joint_axis_error, joint_origin_error, median,
                      record_mean_iou, segmentation_summary,
                      template_accuracy)
from .evalbundle import (BundleResult, evaluate_bundle,
                         parse_camera_trajectory, render_figures,
                         render_report, result_to_csv_rows, result_to_json,
                         write_camera_trajectory)

__all__ = [
    "__version__",
    "FunkitError", "DocumentSyntaxError", "SchemaError", "FileFormatError",
    "InvalidAssetError", "UnknownTargetError", "CodegenError",
    "DegenerateGeometryError", "HelicalMotionError",
    "JOINT_TYPES", "MAPPING_KINDS", "EFFECT_KINDS", "PART_ROLES",
    "STATE_UNITS", "GEOMETRY_FORMATS", "AXIS_UNIT_TOL",
    "StateSpace", "JointSpec", "BinaryMapping", "StepMapping", "LinearMapping",
    "CumulativeMapping", "GeometryEffect", "IlluminationEffect",
    "TemperatureEffect", "FluidEffect", "GeometryRef", "PartGeometry", "Part",
    "FunctionTemplate", "InteractiveObjectAsset", "classify_mapping",
    "Violation", "ValidationReport", "validate_asset",
    "format_real", "parse_asset", "serialize_asset", "parse_joint_document",
    "serialize_joint_document", "parse_template_document",
    "serialize_template_document", "load_pointcloud", "write_pointcloud_xyz",
    "MaskImage", "load_mask", "load_part_index_masks", "write_mask_pgm",
    "write_mask_rle", "parse_trace", "write_trace", "parse_state_trace",
    "write_state_trace",
    "RigidTransform", "rotation_angle", "rotation_about_axis",
    "joint_transform", "apply_joint", "clamp_state",
    "STEP_THRESHOLD_FRACTION", "ActuationTrace", "StateTrace",
    "derive_step_threshold", "derive_linear_slope", "resolve_mapping",
    "eval_mapping", "run_trace",
    "Target", "EmittedScript", "list_targets", "get_target",
    "script_filename", "compute_effect_anchor", "emit_script",
    "parse_manifest",
    "ScrewDecomposition", "fit_rigid", "screw_decompose", "fit_joint",
    "SUCCESS_IOU_GATE", "iou_2d", "iou_3d", "SegRecord", "RoleSegmentation",
    "record_mean_iou", "segmentation_summary", "median", "chamfer_sq",
    "JointPrediction", "ArticulationSummary", "articulation_summary",
    "joint_axis_error", "joint_origin_error", "TemplatePrediction",
    "TemplateAccuracy", "template_accuracy", "CameraTrajectoryPair",
    "CameraPoseError", "camera_pose_error",
    "BundleResult", "evaluate_bundle", "parse_camera_trajectory",
    "write_camera_trajectory", "render_report", "result_to_csv_rows",
    "result_to_json", "render_figures",
]
