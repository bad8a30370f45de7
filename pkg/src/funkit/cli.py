"""Command-line interface.

Subcommands: validate, simulate, compile, evaluate, fit-joint. Exit codes:
0 success, 1 validation or evaluation failure, 2 usage error, 3 I/O error.
File outputs are written atomically (temp file plus rename). ``--format
machine`` emits one JSON document per invocation instead of the text stream;
``--quiet`` silences the text stream.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .artfit import FIXED_AXIS, fit_joint
from .assetio import (parse_asset, parse_trace, serialize_joint_document,
                      write_state_trace)
from .codegen import emit_script, get_target, list_targets, script_filename
from .errors import (DocumentSyntaxError, FileFormatError, FunkitError,
                     SchemaError, UnknownTargetError)
from .evalbundle import (evaluate_bundle, render_figures, render_report,
                         result_to_csv_rows, result_to_json)
from .ir import (IlluminationEffect, JointSpec, TemperatureEffect,
                 validate_asset)
from .runtime import run_trace


class _Output:
    """Routes results to the text stream or the machine document."""

    def __init__(self, quiet: bool, machine: bool, command: str):
        self.quiet = quiet
        self.machine = machine
        self.payload: dict = {"command": command}

    def info(self, text: str):
        if not self.machine and not self.quiet:
            print(text)

    def error(self, text: str):
        if self.machine:
            self.payload["error"] = text
        else:
            print(f"error: {text}", file=sys.stderr)

    def set(self, key: str, value):
        self.payload[key] = value

    def finish(self, exit_code: int):
        if self.machine:
            self.payload["status"] = "ok" if exit_code == 0 else "error"
            print(json.dumps(self.payload, indent=2))


def _read_text(path) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_atomic(path, text: str):
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(target.parent) or ".", prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_valid_asset(path, out: _Output):
    """Parse and validate; reports findings and returns None when unusable."""
    text = _read_text(path)
    try:
        asset = parse_asset(text)
    except (DocumentSyntaxError, SchemaError) as e:
        out.info(f"{type(e).__name__}: {e}")
        out.set("valid", False)
        out.set("errors", [str(e)])
        return None
    report = validate_asset(asset)
    for v in report.violations:
        out.info(f"violation {v.code}: {v.message}")
    if not report.ok:
        out.set("valid", False)
        out.set("violations", [{"code": v.code, "message": v.message}
                               for v in report.violations])
        return None
    return report.canonical


def cmd_validate(args, out: _Output) -> int:
    text = _read_text(args.asset)
    try:
        asset = parse_asset(text)
    except (DocumentSyntaxError, SchemaError) as e:
        out.info(f"{type(e).__name__}: {e}")
        out.set("valid", False)
        out.set("errors", [str(e)])
        return 1
    report = validate_asset(asset)
    for v in report.violations:
        out.info(f"violation {v.code}: {v.message}")
    for w in report.warnings:
        out.info(f"warning {w.code}: {w.message}")
    out.set("valid", report.ok)
    out.set("violations", [{"code": v.code, "message": v.message} for v in report.violations])
    out.set("warnings", [{"code": w.code, "message": w.message} for w in report.warnings])
    if report.ok:
        out.info(f"{args.asset}: ok")
    return 0 if report.ok else 1


def cmd_simulate(args, out: _Output) -> int:
    asset = _load_valid_asset(args.asset, out)
    if asset is None:
        return 1
    trace = parse_trace(_read_text(args.trace), str(args.trace))
    result = run_trace(asset, trace)
    _write_atomic(args.output, write_state_trace(result))
    out.set("output", str(args.output))
    out.set("samples", len(result.samples))
    out.info(f"wrote {args.output} ({len(result.samples)} samples)")
    return 0


def _load_anchor_geometries(asset, asset_path):
    """Load the effector geometry when a derived anchor will be needed."""
    effect = asset.template.effect
    needs = (isinstance(effect, IlluminationEffect) and effect.source_position is None) or (
        isinstance(effect, TemperatureEffect) and effect.heat_source_position is None)
    if not needs:
        return None
    from .assetio import load_pointcloud
    effector = asset.effector()
    geo_path = Path(asset_path).parent / effector.geometry.file
    return {effector.id: load_pointcloud(geo_path, effector.geometry.format)}


def cmd_compile(args, out: _Output) -> int:
    targets = []
    for name in args.target:
        t = get_target(name)
        if t not in targets:
            targets.append(t)
    asset = _load_valid_asset(args.asset, out)
    if asset is None:
        return 1
    geometries = _load_anchor_geometries(asset, args.asset)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for target in targets:
        script = emit_script(asset, target, geometries)
        path = out_dir / script_filename(asset.object_id, target)
        _write_atomic(path, script.source_text)
        written.append(str(path))
        out.info(f"wrote {path}")
    out.set("written", written)
    return 0


def cmd_evaluate(args, out: _Output) -> int:
    result = evaluate_bundle(args.ground_truth, args.predictions)
    report_text = render_report(result)
    if not out.machine and not out.quiet:
        print(report_text, end="")
    if args.report:
        _write_atomic(args.report, report_text)
        out.info(f"wrote {args.report}")
    if args.csv:
        rows = result_to_csv_rows(result)
        text = "section,metric,value\n" + "".join(f"{s},{m},{v}\n" for s, m, v in rows)
        _write_atomic(args.csv, text)
        out.info(f"wrote {args.csv}")
    if args.figures:
        for path in render_figures(result, args.figures):
            out.info(f"wrote {path}")
    out.set("result", result_to_json(result))
    return 0


def _read_observation_frames(path) -> list[np.ndarray]:
    """Frames of xyz points separated by blank lines, all with one cardinality."""
    frames: list[list[list[float]]] = []
    current: list[list[float]] = []
    text = _read_text(path)
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            if current:
                frames.append(current)
                current = []
            continue
        toks = s.split()
        if len(toks) != 3:
            raise FileFormatError("expected 3 numeric fields", str(path), lineno)
        try:
            current.append([float(t) for t in toks])
        except ValueError:
            raise FileFormatError("field is not a real number", str(path), lineno) from None
    if current:
        frames.append(current)
    if not frames:
        raise FileFormatError("no observation frames found", str(path))
    sizes = {len(f) for f in frames}
    if len(sizes) != 1:
        raise FileFormatError(f"frames differ in point count: {sorted(sizes)}", str(path))
    return [np.asarray(f, dtype=float) for f in frames]


def cmd_fit_joint(args, out: _Output) -> int:
    frames = _read_observation_frames(args.observations)
    if len(frames) == 1:
        joint = JointSpec("fixed", FIXED_AXIS, origin=None, range=(0.0, 0.0))
    else:
        joint = fit_joint(frames)
    doc = serialize_joint_document(joint)
    _write_atomic(args.output, doc)
    out.set("output", str(args.output))
    out.set("joint", json.loads(doc))
    out.info(f"wrote {args.output} ({joint.joint_type})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="funkit",
        description="Validate, simulate, compile, and evaluate interactive-object assets.")
    parser.add_argument("--version", action="version", version=f"funkit {__version__}")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress the human-readable output stream")
    parser.add_argument("--format", choices=("text", "machine"), default="text",
                        help="output format; 'machine' emits one JSON document")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an asset document and print violations")
    p.add_argument("asset", help="asset document path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a receptor trace through an asset")
    p.add_argument("asset", help="asset document path")
    p.add_argument("trace", help="receptor trace CSV path")
    p.add_argument("output", help="paired state trace CSV to write")
    p.set_defaults(func=cmd_simulate)

    targets = ", ".join(t.name for t in list_targets())
    p = sub.add_parser("compile", help="emit simulator scripts for an asset")
    p.add_argument("asset", help="asset document path")
    p.add_argument("--target", action="append", required=True,
                   help=f"target backend, repeatable ({targets})")
    p.add_argument("--out-dir", default=".", help="directory for emitted scripts")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("evaluate", help="score a prediction bundle against ground truth")
    p.add_argument("ground_truth", help="ground-truth bundle directory")
    p.add_argument("predictions", help="prediction bundle directory")
    p.add_argument("--report", help="also write the text report to this path")
    p.add_argument("--csv", help="write delimited summary rows (section,metric,value)")
    p.add_argument("--figures", help="write distribution figures into this directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fit-joint", help="estimate a joint from observed part point sets")
    p.add_argument("observations", help="xyz frames separated by blank lines")
    p.add_argument("output", help="joint document to write")
    p.set_defaults(func=cmd_fit_joint)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    out = _Output(quiet=args.quiet, machine=(args.format == "machine"), command=args.command)
    try:
        code = args.func(args, out)
    except UnknownTargetError as e:
        out.error(str(e))
        out.finish(2)
        return 2
    except OSError as e:
        out.error(str(e))
        out.finish(3)
        return 3
    except (FunkitError, ValueError) as e:
        out.error(str(e))
        out.finish(1)
        return 1
    out.finish(code)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
