"""Document serialization, point clouds, masks, and traces."""

import numpy as np
import pytest

from funkit import (ActuationTrace, DocumentSyntaxError, FileFormatError,
                    InvalidAssetError, JointSpec, MaskImage, PartGeometry,
                    SchemaError, StateTrace, format_real, load_mask,
                    load_part_index_masks, load_pointcloud, parse_asset,
                    parse_joint_document, parse_state_trace,
                    parse_template_document, parse_trace, serialize_asset,
                    serialize_joint_document, serialize_template_document,
                    write_mask_pgm, write_mask_rle, write_pointcloud_xyz,
                    write_state_trace, write_trace)

from conftest import random_asset

MICROWAVE_DOC = """\
{
  "format_version": "1.0",
  "object_id": "microwave-01",
  "parts": [
    {
      "id": "door",
      "role": "receptor",
      "geometry": {
        "file": "door.xyz",
        "format": "xyz"
      },
      "joint": {
        "type": "revolute",
        "axis": [0, 0, 1],
        "origin": [0.2, 0, 0],
        "range": [0, 1.5708]
      }
    },
    {
      "id": "cavity",
      "role": "effector",
      "geometry": {
        "file": "cavity.xyz",
        "format": "xyz"
      },
      "joint": {
        "type": "fixed",
        "axis": [0, 0, 1]
      }
    }
  ],
  "function_template": {
    "receptor": "door",
    "effector": "cavity",
    "receptor_space": {
      "kind": "continuous",
      "min": 0,
      "max": 1.5708,
      "unit": "radian"
    },
    "effector_space": {
      "kind": "discrete",
      "labels": ["closed", "open"]
    },
    "mapping": {
      "type": "step",
      "params": {
        "threshold": 0.015,
        "low_value": 0,
        "high_value": 1
      }
    },
    "effect": {
      "type": "geometry",
      "params": {
        "target_joint": "door"
      }
    }
  },
  "metadata": {
    "category": "microwave"
  }
}
"""


# ---------------------------------------------------------------------------
# number formatting

def test_format_real_frozen_cases():
    assert format_real(0.0) == "0"
    assert format_real(1.0) == "1"
    assert format_real(-3.0) == "-3"
    assert format_real(0.5) == "0.5"
    assert format_real(0.015) == "0.015"
    assert format_real(1.5708) == "1.5708"
    assert format_real(2.0 / 3.0) == "0.6666666666666666"
    assert format_real(1e16) == "1e+16"


def test_format_real_round_trips_exactly(rng):
    for _ in range(500):
        x = float(rng.uniform(-1e6, 1e6)) * 10.0 ** int(rng.integers(-12, 12))
        assert float(format_real(x)) == x


def test_format_real_rejects_nonfinite():
    with pytest.raises(ValueError):
        format_real(float("nan"))
    with pytest.raises(ValueError):
        format_real(float("inf"))


# ---------------------------------------------------------------------------
# asset documents

def test_serialize_microwave_matches_frozen_document(microwave):
    assert serialize_asset(microwave) == MICROWAVE_DOC


def test_parse_serialize_round_trip_fixtures(microwave, lamp, faucet, stove):
    for asset in (microwave, lamp, faucet, stove):
        doc = serialize_asset(asset)
        again = parse_asset(doc)
        assert again == asset
        assert serialize_asset(again) == doc


def test_round_trip_random_assets(rng):
    for _ in range(50):
        asset = random_asset(rng)
        doc = serialize_asset(asset)
        assert parse_asset(doc) == asset
        assert serialize_asset(asset) == doc


def test_serialize_rejects_invalid_asset(microwave):
    import dataclasses
    broken = dataclasses.replace(microwave, parts=())
    with pytest.raises(InvalidAssetError) as exc:
        serialize_asset(broken)
    assert "empty-parts" in str(exc.value)


def test_parse_rejects_duplicate_keys():
    with pytest.raises(DocumentSyntaxError):
        parse_asset('{"format_version": "1.0", "format_version": "1.0"}')


def test_parse_rejects_constants_and_junk():
    with pytest.raises(DocumentSyntaxError):
        parse_asset('{"x": NaN}')
    with pytest.raises(DocumentSyntaxError):
        parse_asset('{} trailing')
    # an array is well-formed syntax but the wrong document shape
    with pytest.raises(SchemaError):
        parse_asset('[1, 2]')
    err = None
    try:
        parse_asset('{\n  "a": [1,,2]\n}')
    except DocumentSyntaxError as e:
        err = e
    assert err is not None and err.line == 2


def test_parse_rejects_unknown_and_missing_keys(microwave):
    doc = serialize_asset(microwave)
    with pytest.raises(SchemaError):
        parse_asset(doc.replace('"metadata"', '"extradata"'))
    with pytest.raises(SchemaError):
        parse_asset(doc.replace('  "object_id": "microwave-01",\n', ''))


def test_parse_rejects_bool_where_number_expected(microwave):
    doc = serialize_asset(microwave)
    with pytest.raises(SchemaError):
        parse_asset(doc.replace('"threshold": 0.015', '"threshold": true'))


def test_parse_accepts_integer_tokens_as_reals(microwave):
    doc = serialize_asset(microwave).replace('"min": 0,', '"min": 0,')
    asset = parse_asset(doc)
    assert isinstance(asset.template.receptor_space.min, float)


def test_joint_document_round_trip():
    joint = JointSpec("revolute", (0.0, 1.0, 0.0), origin=(0.1, 0.2, 0.3),
                      range=(-0.5, 1.5))
    doc = serialize_joint_document(joint)
    assert parse_joint_document(doc) == joint
    fixed = JointSpec("fixed", (0.0, 0.0, 1.0))
    assert parse_joint_document(serialize_joint_document(fixed)) == fixed


def test_template_document_round_trip_and_validation():
    doc = serialize_template_document(("fluid", "linear"))
    assert parse_template_document(doc) == ("fluid", "linear")
    with pytest.raises(SchemaError):
        parse_template_document('{"effect": "magic", "mapping": "linear"}')
    with pytest.raises(SchemaError):
        parse_template_document('{"effect": "fluid"}')


# ---------------------------------------------------------------------------
# point clouds

def test_xyz_round_trip(tmp_path, rng):
    geom = PartGeometry(rng.uniform(-2.0, 2.0, size=(40, 3)))
    path = tmp_path / "cloud.xyz"
    write_pointcloud_xyz(path, geom)
    again = load_pointcloud(path, "xyz")
    assert again == geom


def test_xyz_skips_blank_lines_and_reports_bad_lines(tmp_path):
    path = tmp_path / "cloud.xyz"
    path.write_text("1 2 3\n\n4 5 6\n")
    assert load_pointcloud(path, "xyz").points.shape == (2, 3)
    path.write_text("1 2 3\n4 5\n")
    with pytest.raises(FileFormatError) as exc:
        load_pointcloud(path, "xyz")
    assert exc.value.line == 2
    path.write_text("")
    with pytest.raises(FileFormatError):
        load_pointcloud(path, "xyz")


def test_obj_vertices_faces_and_comments(tmp_path):
    path = tmp_path / "mesh.obj"
    path.write_text("# a mesh\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nf 1/1 2/2 3/3\n")
    geom = load_pointcloud(path, "obj")
    assert geom.points.shape == (3, 3)
    assert geom.faces.shape == (2, 3)
    assert np.array_equal(geom.faces[0], [0, 1, 2])
    path.write_text("v 0 0 0\nf 1 2 9\n")
    with pytest.raises(FileFormatError):
        load_pointcloud(path, "obj")
    path.write_text("v 0 0 0\nf 0 1 2\n")
    with pytest.raises(FileFormatError) as exc:
        load_pointcloud(path, "obj")
    assert "positive" in str(exc.value)


def test_ply_ascii_parses_and_enforces_counts(tmp_path):
    path = tmp_path / "mesh.ply"
    path.write_text(
        "ply\nformat ascii 1.0\ncomment made by hand\n"
        "element vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
        "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
        "0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    geom = load_pointcloud(path, "ply-ascii")
    assert geom.points.shape == (3, 3)
    assert np.array_equal(geom.faces, [[0, 1, 2]])
    path.write_text("ply\nformat ascii 1.0\nelement vertex 2\n"
                    "property float x\nproperty float y\nproperty float z\n"
                    "end_header\n0 0 0\n")
    with pytest.raises(FileFormatError):
        load_pointcloud(path, "ply-ascii")
    path.write_text("not a ply\n")
    with pytest.raises(FileFormatError):
        load_pointcloud(path, "ply-ascii")


def test_ply_reorders_vertex_properties(tmp_path):
    path = tmp_path / "mesh.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 1\n"
        "property float z\nproperty float x\nproperty float y\nend_header\n"
        "3 1 2\n")
    geom = load_pointcloud(path, "ply-ascii")
    assert np.array_equal(geom.points, [[1.0, 2.0, 3.0]])


def test_load_pointcloud_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        load_pointcloud(tmp_path / "x.stl", "stl")


# ---------------------------------------------------------------------------
# masks

def test_pgm_bytes_are_frozen(tmp_path):
    mask = MaskImage(np.array([[True, False, True], [False, True, False]]))
    path = tmp_path / "m.pgm"
    write_mask_pgm(path, mask)
    assert path.read_bytes() == b"P5\n3 2\n255\n\xff\x00\xff\x00\xff\x00"
    assert load_mask(path, "pgm") == mask


def test_pgm_header_comments_and_nonzero_is_foreground(tmp_path):
    path = tmp_path / "m.pgm"
    path.write_bytes(b"P5\n# a comment\n2 1\n255\n\x7f\x00")
    mask = load_mask(path, "pgm")
    assert mask.pixels.tolist() == [[True, False]]


def test_pgm_rejects_wrong_maxval_and_truncation(tmp_path):
    path = tmp_path / "m.pgm"
    path.write_bytes(b"P5\n2 1\n65535\n\x00\x00")
    with pytest.raises(FileFormatError):
        load_mask(path, "pgm")
    path.write_bytes(b"P5\n2 2\n255\n\x00\x00")
    with pytest.raises(FileFormatError):
        load_mask(path, "pgm")
    path.write_bytes(b"P6\n2 1\n255\n\x00\x00")
    with pytest.raises(FileFormatError):
        load_mask(path, "pgm")


def test_rle_counts_are_frozen_column_major(tmp_path):
    mask = MaskImage(np.array([[True, False], [False, True]]))
    path = tmp_path / "m.json"
    write_mask_rle(path, mask)
    assert path.read_text() == '{"size": [2, 2], "counts": [0, 1, 2, 1]}\n'
    assert load_mask(path, "rle-json") == mask


def test_rle_round_trip_random(tmp_path, rng):
    for i in range(20):
        h, w = int(rng.integers(1, 12)), int(rng.integers(1, 12))
        mask = MaskImage(rng.random((h, w)) < 0.4)
        path = tmp_path / f"m{i}.json"
        write_mask_rle(path, mask)
        assert load_mask(path, "rle-json") == mask


def test_rle_rejects_bad_documents(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"size": [2, 2], "counts": [1, 1]}')
    with pytest.raises(FileFormatError):
        load_mask(path, "rle-json")
    path.write_text('{"size": [2, 2], "counts": [0, 4], "extra": 1}')
    with pytest.raises(FileFormatError):
        load_mask(path, "rle-json")
    path.write_text('{"size": [0, 2], "counts": []}')
    with pytest.raises(FileFormatError):
        load_mask(path, "rle-json")
    with pytest.raises(ValueError):
        load_mask(path, "png")


def test_part_index_masks(tmp_path):
    path = tmp_path / "parts.json"
    path.write_text('{"n_points": 5, "masks": {"door": [0, 1, 4], "body": [2, 3]}}')
    n, masks = load_part_index_masks(path)
    assert n == 5
    assert masks == {"door": (0, 1, 4), "body": (2, 3)}
    path.write_text('{"n_points": 3, "masks": {"door": [3]}}')
    with pytest.raises(FileFormatError):
        load_part_index_masks(path)


# ---------------------------------------------------------------------------
# traces

def test_trace_round_trip():
    trace = ActuationTrace(samples=((0.0, 0.0), (0.5, 0.01), (1.0, 0.4)))
    text = write_trace(trace)
    assert text == "t,receptor_state\n0,0\n0.5,0.01\n1,0.4\n"
    assert parse_trace(text) == trace


def test_state_trace_round_trip():
    trace = StateTrace(samples=((0.0, 0.0, 20.0), (1.0, 1.0, 30.0)))
    text = write_state_trace(trace)
    assert text == "t,receptor_state,effector_state\n0,0,20\n1,1,30\n"
    assert parse_state_trace(text) == trace


def test_trace_parser_is_strict():
    with pytest.raises(FileFormatError):
        parse_trace("time,receptor_state\n0,0\n")
    with pytest.raises(FileFormatError):
        parse_trace("t,receptor_state\n0,0\n0,1\n")  # t must strictly increase
    with pytest.raises(FileFormatError):
        parse_trace("t,receptor_state\n0,0\n1\n")
    with pytest.raises(FileFormatError):
        parse_trace("t,receptor_state\n0,inf\n")
    # blank lines are tolerated
    assert len(parse_trace("t,receptor_state\n\n0,0\n\n1,1\n").samples) == 2


def test_trace_model_rejects_non_increasing_t():
    with pytest.raises(ValueError):
        ActuationTrace(samples=((1.0, 0.0), (1.0, 1.0)))
    with pytest.raises(ValueError):
        StateTrace(samples=((2.0, 0.0, 0.0), (1.0, 0.0, 0.0)))
