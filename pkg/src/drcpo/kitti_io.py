"""Readers and writers for KITTI-style frame files.

Three on-disk formats:

* velodyne ``.bin``: packed little-endian float32 quadruples (x, y, z, r),
  no header.
* native label text: one object per line, ``class cx cy cz l w h theta``
  in the sensor frame; ``#`` lines are comments.
* KITTI label + calibration text: the standard camera-frame annotation,
  converted to the sensor frame on read.

Plus an ASCII PLY export for eyeballing frames in any point-cloud viewer.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .errors import MalformedLine, MissingCalibKey, SizeNotMultipleOf16
from .geometry import CLASSES, BoundingBox, Frame, LabeledObject, normalize_angle, points_in_box

log = logging.getLogger("drcpo.io")

RECORD_BYTES = 16  # four little-endian float32 per return


def read_velodyne_bin(path):
    """Decode a velodyne binary into an (N, 4) float64 array.

    Values are exact float32 payloads widened to float64, so a subsequent
    write reproduces the file bit for bit.
    """
    data = Path(path).read_bytes()
    if len(data) % RECORD_BYTES != 0:
        raise SizeNotMultipleOf16(f"{path}: {len(data)} bytes is not a multiple of {RECORD_BYTES}")
    raw = np.frombuffer(data, dtype="<f4").reshape(-1, 4)
    return raw.astype(np.float64)


def write_velodyne_bin(points, path):
    """Write points as packed little-endian float32 quadruples."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 4)
    Path(path).write_bytes(pts.astype("<f4").tobytes())


def read_labels(path):
    """Parse a native label file into (class, BoundingBox) pairs.

    Lines with classes outside Car/Pedestrian/Cyclist are skipped; a single
    warning reports how many were dropped.
    """
    records = []
    skipped = 0
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split()
            if len(fields) != 8:
                raise MalformedLine(line_no, f"expected 8 fields, got {len(fields)}")
            cls = fields[0]
            try:
                vals = [float(v) for v in fields[1:]]
            except ValueError as exc:
                raise MalformedLine(line_no, str(exc)) from None
            if cls not in CLASSES:
                skipped += 1
                continue
            records.append((cls, BoundingBox(*vals)))
    if skipped:
        log.warning("%s: skipped %d label line(s) with unsupported classes", path, skipped)
    return records


def write_labels(records, path):
    """Write (class, BoundingBox) pairs in the native label format.

    Nine significant digits round-trip float32-precision values exactly.
    """
    lines = []
    for cls, box in records:
        vals = " ".join(
            format(v, ".9g") for v in (box.cx, box.cy, box.cz, box.l, box.w, box.h, box.theta)
        )
        lines.append(f"{cls} {vals}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_calib(path):
    """Parse a KITTI calibration file into homogeneous 4x4 matrices."""
    mats = {}
    with open(path) as fh:
        for line in fh:
            if ":" not in line:
                continue
            key, rest = line.split(":", 1)
            vals = rest.split()
            try:
                mats[key.strip()] = np.array([float(v) for v in vals])
            except ValueError:
                continue
    out = {}
    for key, shape in (("R0_rect", (3, 3)), ("Tr_velo_to_cam", (3, 4))):
        if key not in mats or mats[key].size != shape[0] * shape[1]:
            raise MissingCalibKey(key)
        m = np.eye(4)
        m[: shape[0], : shape[1]] = mats[key].reshape(shape)
        out[key] = m
    return out


def read_kitti_labels(label_path, calib_path):
    """Convert KITTI camera-frame labels into sensor-frame (class, BoundingBox) pairs.

    The camera box center maps through the inverse of R0_rect @ Tr_velo_to_cam,
    the bottom-face center is lifted by h/2, and the camera yaw ry becomes a
    sensor heading of -ry - pi/2.
    """
    calib = read_calib(calib_path)
    cam_to_velo = np.linalg.inv(calib["R0_rect"] @ calib["Tr_velo_to_cam"])
    records = []
    with open(label_path) as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split()
            if len(fields) < 15:
                raise MalformedLine(line_no, f"expected >=15 fields, got {len(fields)}")
            cls = fields[0]
            if cls not in CLASSES:
                continue
            try:
                h, w, l = (float(v) for v in fields[8:11])
                cam_xyz = np.array([float(v) for v in fields[11:14]] + [1.0])
                ry = float(fields[14])
            except ValueError as exc:
                raise MalformedLine(line_no, str(exc)) from None
            velo = cam_to_velo @ cam_xyz
            theta = normalize_angle(-ry - np.pi / 2.0)
            records.append((cls, BoundingBox(velo[0], velo[1], velo[2] + h / 2.0, l, w, h, theta)))
    return records


def split_frame(points, labels, frame_id=""):
    """Partition a cloud into per-object point sets and background.

    Each point goes to the first box (in label order) that contains it;
    leftover points form the background. Point count is conserved exactly.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 4)
    unassigned = np.ones(len(pts), dtype=bool)
    objects = []
    for cls, box in labels:
        mask = unassigned & points_in_box(pts, box)
        objects.append(LabeledObject(pts[mask], cls, box))
        unassigned &= ~mask
    return Frame(frame_id, pts[unassigned], objects)


def load_frame(cloud_path, label_path, frame_id=None):
    """Read a velodyne binary plus native labels and split them into a Frame."""
    if frame_id is None:
        frame_id = Path(cloud_path).stem
    points = read_velodyne_bin(cloud_path)
    labels = read_labels(label_path)
    return split_frame(points, labels, frame_id=frame_id)


def write_frame(frame: Frame, cloud_path, label_path):
    """Persist a frame as a velodyne binary plus a native label file."""
    write_velodyne_bin(frame.all_points(), cloud_path)
    write_labels([(o.label, o.box) for o in frame.objects], label_path)


CLASS_COLORS = {
    "Car": (214, 39, 40),
    "Pedestrian": (44, 160, 44),
    "Cyclist": (31, 119, 180),
}
BACKGROUND_COLOR = (128, 128, 128)


def export_ply(frame: Frame, path, color_mode="class"):
    """Write the frame as an ASCII PLY with per-vertex colors.

    color_mode "class" paints the background gray and each class with a
    fixed color; "intensity" maps reflectance to a gray ramp.
    """
    if color_mode not in ("class", "intensity"):
        raise ValueError(f"unknown color_mode {color_mode!r}")
    chunks = [(frame.background, BACKGROUND_COLOR)]
    chunks += [(o.points, CLASS_COLORS[o.label]) for o in frame.objects]
    total = sum(len(p) for p, _ in chunks)
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {total}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        "end_header",
    ]
    for pts, color in chunks:
        for x, y, z, r in pts:
            if color_mode == "intensity":
                g = int(np.clip(r, 0.0, 1.0) * 255)
                c = (g, g, g)
            else:
                c = color
            lines.append(f"{x:.6f} {y:.6f} {z:.6f} {c[0]} {c[1]} {c[2]}")
    Path(path).write_text("\n".join(lines) + "\n")
