"""Geometric primitives shared by the whole augmentation pipeline.

Point clouds are (N, 4) float64 arrays laid out as x, y, z, intensity in
the sensor frame (x forward, y left, z up). Boxes are oriented about the
vertical axis only; headings live in (-pi, pi].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonCanonicalBox

CLASSES = ("Car", "Pedestrian", "Cyclist")

CANONICAL_EPS = 1e-9
POINT_IN_BOX_EPS = 1e-6  # slack for sensor quantization noise


def normalize_angle(theta):
    """Wrap an angle (scalar or array) to (-pi, pi]."""
    t = np.remainder(theta, 2.0 * np.pi)  # [0, 2pi)
    t = np.where(t > np.pi, t - 2.0 * np.pi, t)
    return float(t) if np.isscalar(theta) else t


def as_points(arr):
    """Return ``arr`` as a contiguous (N, 4) float64 array."""
    pts = np.asarray(arr, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 4:
        raise ValueError(f"expected an (N, 4) point array, got shape {pts.shape}")
    return np.ascontiguousarray(pts)


@dataclass(frozen=True)
class BoundingBox:
    """Oriented 3D box: center, extents, heading about z."""

    cx: float
    cy: float
    cz: float
    l: float
    w: float
    h: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.l > 0 and self.w > 0 and self.h > 0):
            raise ValueError(f"box extents must be positive, got {(self.l, self.w, self.h)}")
        vals = (self.cx, self.cy, self.cz, self.l, self.w, self.h, self.theta)
        if not all(np.isfinite(vals)):
            raise ValueError(f"box fields must be finite, got {vals}")
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def center(self):
        return np.array([self.cx, self.cy, self.cz])

    @property
    def extents(self):
        return np.array([self.l, self.w, self.h])

    @property
    def volume(self):
        return self.l * self.w * self.h

    def is_canonical(self, eps=CANONICAL_EPS):
        return (
            abs(self.cx) <= eps
            and abs(self.cy) <= eps
            and abs(self.cz) <= eps
            and abs(self.theta) <= eps
        )

    def corners_bev(self):
        """The four (x, y) corners of the box footprint, counter-clockwise."""
        c, s = np.cos(self.theta), np.sin(self.theta)
        dx, dy = self.l / 2.0, self.w / 2.0
        local = np.array([[dx, dy], [-dx, dy], [-dx, -dy], [dx, -dy]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([self.cx, self.cy])


@dataclass(frozen=True)
class Pose:
    """A world placement: translation plus heading about z."""

    x: float
    y: float
    z: float
    theta: float = 0.0

    def __post_init__(self):
        if not all(np.isfinite((self.x, self.y, self.z, self.theta))):
            raise ValueError("pose fields must be finite")
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @classmethod
    def identity(cls):
        return cls(0.0, 0.0, 0.0, 0.0)


@dataclass
class LabeledObject:
    """A labeled point set together with its oriented box."""

    points: np.ndarray  # (N, 4) float64
    label: str
    box: BoundingBox

    def __post_init__(self):
        self.points = as_points(self.points)
        if self.label not in CLASSES:
            raise ValueError(f"unknown class {self.label!r}")

    def __len__(self):
        return len(self.points)

    def copy(self):
        return LabeledObject(self.points.copy(), self.label, self.box)

    def validate(self, eps=POINT_IN_BOX_EPS):
        """Check that every point lies inside the box (with slack eps)."""
        if len(self.points) == 0:
            return True
        return bool(np.all(points_in_box(self.points, self.box, eps=eps)))


@dataclass
class Frame:
    """A full point cloud split into background points and labeled objects."""

    frame_id: str
    background: np.ndarray  # (N, 4) float64
    objects: list[LabeledObject] = field(default_factory=list)

    def __post_init__(self):
        self.background = as_points(self.background)

    @property
    def total_points(self):
        return len(self.background) + sum(len(o) for o in self.objects)

    def all_points(self):
        """Background plus all object points, objects in label order."""
        parts = [self.background] + [o.points for o in self.objects]
        return np.vstack(parts) if parts else np.empty((0, 4))

    def class_counts(self):
        counts = {c: 0 for c in CLASSES}
        for obj in self.objects:
            counts[obj.label] += 1
        return counts


def rotate_z(points, angle):
    """Rotate the xy components of each point about the origin; z and intensity pass through."""
    pts = as_points(points).copy()
    c, s = np.cos(angle), np.sin(angle)
    x, y = pts[:, 0].copy(), pts[:, 1].copy()
    pts[:, 0] = c * x - s * y
    pts[:, 1] = s * x + c * y
    return pts


def _rotate_xyz(xyz, angle):
    c, s = np.cos(angle), np.sin(angle)
    out = xyz.copy()
    out[:, 0] = c * xyz[:, 0] - s * xyz[:, 1]
    out[:, 1] = s * xyz[:, 0] + c * xyz[:, 1]
    return out


def to_canonical(obj: LabeledObject):
    """Move an object to the origin with zero heading.

    Returns the canonical object and the Pose that undoes the transform,
    so ``from_canonical(canonical, pose)`` reproduces the input.
    """
    box = obj.box
    pose = Pose(box.cx, box.cy, box.cz, box.theta)
    pts = obj.points.copy()
    pts[:, :3] -= box.center
    pts[:, :3] = _rotate_xyz(pts[:, :3], -box.theta)
    canon_box = BoundingBox(0.0, 0.0, 0.0, box.l, box.w, box.h, 0.0)
    return LabeledObject(pts, obj.label, canon_box), pose


def from_canonical(obj: LabeledObject, pose: Pose):
    """Rotate an object by pose.theta, then translate it to (pose.x, pose.y, pose.z)."""
    pts = obj.points.copy()
    pts[:, :3] = _rotate_xyz(pts[:, :3], pose.theta)
    pts[:, 0] += pose.x
    pts[:, 1] += pose.y
    pts[:, 2] += pose.z
    box = obj.box
    cx, cy = _rotate_xy(box.cx, box.cy, pose.theta)
    new_box = BoundingBox(
        cx + pose.x, cy + pose.y, box.cz + pose.z,
        box.l, box.w, box.h, box.theta + pose.theta,
    )
    return LabeledObject(pts, obj.label, new_box)


def _rotate_xy(x, y, angle):
    c, s = np.cos(angle), np.sin(angle)
    return c * x - s * y, s * x + c * y


def mirror_x(points):
    """Append the reflection of every point across the xz-plane (y -> -y)."""
    pts = as_points(points)
    refl = pts.copy()
    refl[:, 1] = -refl[:, 1]
    return np.vstack([pts, refl])


def box_similarity(a: BoundingBox, b: BoundingBox):
    """Volume IoU of two canonically posed boxes.

    Both boxes must be centered and axis-aligned, which reduces the
    intersection to the product of per-axis extent minima.
    """
    if not a.is_canonical() or not b.is_canonical():
        raise NonCanonicalBox("box_similarity requires centered boxes with zero heading")
    inter = min(a.l, b.l) * min(a.w, b.w) * min(a.h, b.h)
    union = a.volume + b.volume - inter
    return inter / union


def bev_overlap(a: BoundingBox, b: BoundingBox):
    """True iff the birds-eye-view footprints of two boxes intersect.

    Separating-axis test over the four edge normals; touching rectangles
    count as overlapping.
    """
    ca = a.corners_bev()
    cb = b.corners_bev()
    for theta in (a.theta, b.theta):
        c, s = np.cos(theta), np.sin(theta)
        for ax in ((c, s), (-s, c)):
            pa = ca @ ax
            pb = cb @ ax
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def box_diagonal(b: BoundingBox):
    """Length of the box's space diagonal."""
    return float(np.sqrt(b.l * b.l + b.w * b.w + b.h * b.h))


def points_in_box(points, box: BoundingBox, eps=POINT_IN_BOX_EPS):
    """Boolean mask of points inside the oriented box, with eps slack per axis."""
    pts = np.asarray(points, dtype=np.float64)
    rel = pts[:, :3] - box.center
    local = _rotate_xyz(rel, -box.theta)
    half = box.extents / 2.0 + eps
    return np.all(np.abs(local) <= half, axis=1)
