"""End-to-end command-line checks driven through main()."""

import json
import math

import numpy as np
import pytest

from funkit import (emit_script, parse_joint_document, parse_state_trace,
                    rotation_about_axis, serialize_asset)
from funkit.cli import main
from test_evalbundle import _write_bundle


@pytest.fixture
def asset_path(tmp_path, microwave):
    path = tmp_path / "microwave.json"
    path.write_text(serialize_asset(microwave))
    return path


def test_validate_ok(asset_path, capsys):
    assert main(["validate", str(asset_path)]) == 0
    out = capsys.readouterr().out
    assert f"{asset_path}: ok" in out


def test_validate_reports_violations(asset_path, capsys):
    doc = asset_path.read_text().replace("[0, 0, 1]", "[0, 0, 0]")
    bad = asset_path.parent / "bad.json"
    bad.write_text(doc)
    assert main(["validate", str(bad)]) == 1
    assert "axis" in capsys.readouterr().out


def test_validate_reports_syntax_errors(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"format_version": "1.0",')
    assert main(["validate", str(path)]) == 1
    assert "DocumentSyntaxError" in capsys.readouterr().out


def test_validate_missing_file_is_io_error(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "absent.json")]) == 3
    assert "error:" in capsys.readouterr().err


def test_machine_format_emits_json(asset_path, capsys):
    assert main(["--format", "machine", "validate", str(asset_path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["command"] == "validate"
    assert payload["status"] == "ok"
    assert payload["valid"] is True
    assert payload["violations"] == []


def test_machine_format_on_failure(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("[]")
    assert main(["--format", "machine", "validate", str(path)]) == 1
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "error"
    assert payload["valid"] is False


def test_quiet_suppresses_text(asset_path, capsys):
    assert main(["--quiet", "validate", str(asset_path)]) == 0
    assert capsys.readouterr().out == ""


def test_simulate_writes_state_trace(asset_path, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    trace.write_text("t,receptor_state\n0,0\n0.5,0.01\n1,0.4\n")
    out_path = tmp_path / "states.csv"
    assert main(["simulate", str(asset_path), str(trace), str(out_path)]) == 0
    result = parse_state_trace(out_path.read_text())
    assert [e for _, _, e in result.samples] == [0.0, 0.0, 1.0]
    assert str(out_path) in capsys.readouterr().out


def test_simulate_rejects_bad_trace(asset_path, tmp_path):
    trace = tmp_path / "trace.csv"
    trace.write_text("t,receptor_state\n1,0\n0.5,0\n")  # t not increasing
    assert main(["simulate", str(asset_path), str(trace),
                 str(tmp_path / "out.csv")]) == 1
    assert not (tmp_path / "out.csv").exists()


def test_compile_writes_all_targets(asset_path, tmp_path, microwave, capsys):
    out_dir = tmp_path / "scripts"
    assert main(["compile", str(asset_path), "--target", "isaacsim",
                 "--target", "behavior", "--target", "genesis",
                 "--out-dir", str(out_dir)]) == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["microwave-01.behavior.script", "microwave-01.genesis.script",
                     "microwave-01.isaacsim.script"]
    emitted = emit_script(microwave, "isaacsim")
    assert (out_dir / "microwave-01.isaacsim.script").read_text() == emitted.source_text
    assert capsys.readouterr().out.count("wrote ") == 3


def test_compile_dedupes_repeated_targets(asset_path, tmp_path, capsys):
    assert main(["--format", "machine", "compile", str(asset_path),
                 "--target", "genesis", "--target", "genesis",
                 "--out-dir", str(tmp_path / "s")]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["written"]) == 1


def test_compile_unknown_target_is_usage_error(asset_path, tmp_path, capsys):
    assert main(["compile", str(asset_path), "--target", "mujoco",
                 "--out-dir", str(tmp_path)]) == 2
    assert "unknown target" in capsys.readouterr().err


def test_evaluate_writes_outputs(tmp_path, capsys):
    gt, pred = _write_bundle(tmp_path)
    report = tmp_path / "report.txt"
    csv = tmp_path / "summary.csv"
    figs = tmp_path / "figs"
    assert main(["evaluate", str(gt), str(pred), "--report", str(report),
                 "--csv", str(csv), "--figures", str(figs)]) == 0
    out = capsys.readouterr().out
    assert "[articulation]" in out
    assert report.read_text().startswith("interactive-object evaluation report")
    lines = csv.read_text().splitlines()
    assert lines[0] == "section,metric,value"
    assert any(line.startswith("segmentation,") for line in lines[1:])
    assert len(list(figs.glob("*.png"))) == 4


def test_evaluate_machine_payload(tmp_path, capsys):
    gt, pred = _write_bundle(tmp_path)
    assert main(["--format", "machine", "evaluate", str(gt), str(pred)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["result"]["articulation"]["failure_rate_pct"] == 50.0


def _write_frames(path, frames):
    blocks = ["\n".join(" ".join(repr(c) for c in p) for p in frame)
              for frame in frames]
    path.write_text("\n\n".join(blocks) + "\n")


def test_fit_joint_single_frame_is_fixed(tmp_path, capsys):
    obs = tmp_path / "obs.txt"
    _write_frames(obs, [[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]])
    out_path = tmp_path / "joint.json"
    assert main(["fit-joint", str(obs), str(out_path)]) == 0
    joint = parse_joint_document(out_path.read_text())
    assert joint.joint_type == "fixed"
    assert joint.range == (0.0, 0.0)
    assert "(fixed)" in capsys.readouterr().out


def test_fit_joint_recovers_revolute(tmp_path):
    base = np.array([[0.3, 0.0, 0.0], [0.6, 0.0, 0.0],
                     [0.6, 0.4, 0.0], [0.3, 0.4, 0.2]])
    origin = np.array([0.1, 0.2, 0.0])
    frames = []
    for angle in (0.0, 0.4, 0.9):
        R = rotation_about_axis((0.0, 0.0, 1.0), angle)
        frames.append((base - origin) @ R.T + origin)
    obs = tmp_path / "obs.txt"
    _write_frames(obs, [f.tolist() for f in frames])
    out_path = tmp_path / "joint.json"
    assert main(["fit-joint", str(obs), str(out_path)]) == 0
    joint = parse_joint_document(out_path.read_text())
    assert joint.joint_type == "revolute"
    assert abs(abs(joint.axis[2]) - 1.0) < 1e-6
    assert math.hypot(joint.origin[0] - 0.1, joint.origin[1] - 0.2) < 1e-6


def test_fit_joint_rejects_ragged_frames(tmp_path, capsys):
    obs = tmp_path / "obs.txt"
    obs.write_text("0 0 0\n1 0 0\n\n0 0 0\n")
    assert main(["fit-joint", str(obs), str(tmp_path / "j.json")]) == 1
    assert "differ in point count" in capsys.readouterr().err


def test_version_and_usage():
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 2
