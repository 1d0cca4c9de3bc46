import struct

import numpy as np
import pytest

from drcpo.errors import MalformedLine, MissingCalibKey, SizeNotMultipleOf16
from drcpo.geometry import BoundingBox, Frame, LabeledObject
from drcpo.kitti_io import (
    export_ply,
    read_kitti_labels,
    read_labels,
    read_velodyne_bin,
    split_frame,
    write_labels,
    write_velodyne_bin,
)


def test_read_bin_empty(tmp_path):
    p = tmp_path / "empty.bin"
    p.write_bytes(b"")
    assert read_velodyne_bin(p).shape == (0, 4)


def test_read_bin_hand_encoded(tmp_path):
    p = tmp_path / "one.bin"
    p.write_bytes(struct.pack("<4f", 1.0, 2.0, 3.0, 0.5))
    pts = read_velodyne_bin(p)
    assert pts.shape == (1, 4)
    assert pts[0].tolist() == [1.0, 2.0, 3.0, 0.5]


def test_read_bin_bad_size(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"\x00" * 17)
    with pytest.raises(SizeNotMultipleOf16):
        read_velodyne_bin(p)


def test_write_bin_empty_and_single(tmp_path):
    p = tmp_path / "o.bin"
    write_velodyne_bin(np.empty((0, 4)), p)
    assert p.stat().st_size == 0
    write_velodyne_bin(np.array([[1.0, 2.0, 3.0, 0.5]]), p)
    assert p.stat().st_size == 16


def test_bin_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    pts = rng.uniform(-100, 100, (10_000, 4)).astype(np.float32).astype(np.float64)
    pts[0] = [-0.0, 0.0, -0.0, 0.0]  # negative zero must survive
    p = tmp_path / "rt.bin"
    write_velodyne_bin(pts, p)
    first = p.read_bytes()
    back = read_velodyne_bin(p)
    write_velodyne_bin(back, p)
    assert p.read_bytes() == first
    assert np.signbit(back[0, 0]) and np.signbit(back[0, 2])


def test_read_labels_empty(tmp_path):
    p = tmp_path / "l.txt"
    p.write_text("")
    assert read_labels(p) == []


def test_read_labels_basic_and_comments(tmp_path):
    p = tmp_path / "l.txt"
    p.write_text("# comment\nCar 10 0 -1 4 1.8 1.5 0\n\nVan 1 2 3 4 5 6 0\n")
    records = read_labels(p)
    assert len(records) == 1
    cls, box = records[0]
    assert cls == "Car"
    assert (box.cx, box.cy, box.cz, box.l, box.w, box.h, box.theta) == (10, 0, -1, 4, 1.8, 1.5, 0)


def test_read_labels_malformed(tmp_path):
    p = tmp_path / "l.txt"
    p.write_text("Car 10 0 -1 4\n")
    with pytest.raises(MalformedLine) as exc:
        read_labels(p)
    assert exc.value.line_no == 1
    p.write_text("Car 10 0 -1 4 1.8 1.5 zero\n")
    with pytest.raises(MalformedLine):
        read_labels(p)


def test_label_round_trip_precision(tmp_path):
    rng = np.random.default_rng(1)
    records = []
    for _ in range(50):
        vals = rng.uniform(-60, 60, 3)
        ext = rng.uniform(0.3, 5, 3)
        records.append(("Cyclist", BoundingBox(*vals, *ext, rng.uniform(-np.pi, np.pi))))
    p = tmp_path / "rt.txt"
    write_labels(records, p)
    back = read_labels(p)
    for (c0, b0), (c1, b1) in zip(records, back):
        assert c0 == c1
        for f in ("cx", "cy", "cz", "l", "w", "h", "theta"):
            assert getattr(b1, f) == pytest.approx(getattr(b0, f), rel=1e-8, abs=1e-8)


IDENTITY_CALIB = """\
P2: 1 0 0 0 0 1 0 0 0 0 1 0
R0_rect: 1 0 0 0 1 0 0 0 1
Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0
"""

# standard object-devkit calibration (frame 000000 of the detection split)
DEVKIT_CALIB = """\
R0_rect: 0.9999239 0.00983776 -0.007445048 -0.009869795 0.9999421 -0.004278459 0.007402527 0.004351614 0.9999631
Tr_velo_to_cam: 0.007533745 -0.9999714 -0.000616602 -0.004069766 0.01480249 0.0007280733 -0.9998902 -0.07631618 0.9998621 0.00752379 0.01480755 -0.2717806
"""


def _label_line(x, y, z, ry, h=1.5, w=1.6, l=3.9, cls="Car"):
    return f"{cls} 0 0 0 0 0 50 50 {h} {w} {l} {x} {y} {z} {ry}\n"


def test_kitti_labels_identity_calib(tmp_path):
    calib = tmp_path / "calib.txt"
    calib.write_text(IDENTITY_CALIB)
    label = tmp_path / "label.txt"
    label.write_text(_label_line(0, 0, 0, -np.pi / 2))
    records = read_kitti_labels(label, calib)
    assert len(records) == 1
    _, box = records[0]
    assert box.theta == pytest.approx(0.0)
    assert box.cz == pytest.approx(0.75)  # bottom-face center lifted by h/2


def test_kitti_labels_devkit_sample(tmp_path):
    calib = tmp_path / "calib.txt"
    calib.write_text(DEVKIT_CALIB)
    label = tmp_path / "label.txt"
    label.write_text(_label_line(0.0, 0.0, 10.0, 0.0))
    _, box = read_kitti_labels(label, calib)[0]
    # camera optical axis at 10 m is straight ahead of the sensor
    assert box.cx == pytest.approx(10.0, abs=0.5)
    assert abs(box.cy) < 0.5
    assert abs(box.cz) < 1.5


def test_kitti_labels_missing_calib_key(tmp_path):
    calib = tmp_path / "calib.txt"
    calib.write_text("R0_rect: 1 0 0 0 1 0 0 0 1\n")
    label = tmp_path / "label.txt"
    label.write_text(_label_line(0, 0, 10, 0))
    with pytest.raises(MissingCalibKey) as exc:
        read_kitti_labels(label, calib)
    assert exc.value.key == "Tr_velo_to_cam"


def test_split_frame_no_labels():
    pts = np.random.default_rng(2).uniform(-5, 5, (100, 4))
    frame = split_frame(pts, [])
    assert len(frame.background) == 100
    assert frame.objects == []


def test_split_frame_counts_and_conservation():
    rng = np.random.default_rng(3)
    inside = np.c_[rng.uniform(-1, 1, (5, 3)) * [1.5, 0.7, 0.6], rng.uniform(0, 1, 5)]
    outside = np.c_[rng.uniform(20, 30, (5, 3)), rng.uniform(0, 1, 5)]
    pts = np.vstack([inside, outside])
    frame = split_frame(pts, [("Car", BoundingBox(0, 0, 0, 4, 2, 2, 0))])
    assert len(frame.objects[0]) == 5
    assert len(frame.background) == 5
    assert frame.total_points == 10


def test_split_frame_overlapping_first_box_wins():
    pts = np.array([[0.0, 0.0, 0.0, 0.5]])
    labels = [("Car", BoundingBox(0, 0, 0, 2, 2, 2, 0)), ("Pedestrian", BoundingBox(0, 0, 0, 3, 3, 3, 0))]
    frame = split_frame(pts, labels)
    assert len(frame.objects[0]) == 1
    assert len(frame.objects[1]) == 0
    assert frame.total_points == 1


def _parse_ply(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "ply"
    assert lines[1] == "format ascii 1.0"
    n = None
    props = []
    for i, line in enumerate(lines[2:], start=2):
        if line.startswith("element vertex"):
            n = int(line.split()[-1])
        elif line.startswith("property"):
            props.append(line.split()[-1])
        elif line == "end_header":
            body = lines[i + 1 :]
            break
    assert props == ["x", "y", "z", "red", "green", "blue"]
    rows = [row.split() for row in body if row]
    assert len(rows) == n
    return np.array([[float(v) for v in row] for row in rows]) if rows else np.empty((0, 6))


def test_export_ply_empty_and_small(tmp_path):
    empty = Frame("e", np.empty((0, 4)))
    p = tmp_path / "empty.ply"
    export_ply(empty, p)
    assert _parse_ply(p).shape[0] == 0

    pts = np.array([[1.0, 2.0, 3.0, 0.5], [0, 0, 0, 0.1], [4, 4, 4, 0.9]])
    frame = Frame("t", pts[:2], [LabeledObject(pts[2:], "Car", BoundingBox(4, 4, 4, 2, 2, 2, 0))])
    p2 = tmp_path / "three.ply"
    export_ply(frame, p2, color_mode="class")
    rows = _parse_ply(p2)
    assert rows.shape[0] == 3
    assert rows[0][:3].tolist() == [1.0, 2.0, 3.0]
    assert rows[2][3:].tolist() == [214, 39, 40]  # car color

    export_ply(frame, p2, color_mode="intensity")
    rows = _parse_ply(p2)
    assert rows[0][3] == rows[0][4] == rows[0][5] == int(0.5 * 255)
