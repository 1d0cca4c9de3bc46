"""Hidden Point Removal: spherical flipping plus convex-hull visibility.

A point is visible from viewpoint C when its spherically flipped image is
a vertex of the convex hull of the flipped cloud united with C. The flip
radius R controls how forgiving the test is: larger R flattens the flipped
surface and admits more near-silhouette points.

Two pipeline applications: per-object (self-occlusion and distance-based
density falloff, with R tied to the box diagonal) and per-frame (occlusion
between objects, with a very large fixed R).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import PointAtViewpoint, PointBeyondRadius
from .geometry import Frame, LabeledObject, box_diagonal

VIEWPOINT_EPS = 1e-9
DEFAULT_JITTER = 1e-7  # meters, far below sensor precision
DEFAULT_RADIUS_SCALE = 200.0  # flip radius per unit of box diagonal


@dataclass(frozen=True)
class EHprParams:
    """Frame-level HPR parameters. Defaults match a 100k flip radius with
    the viewpoint on the sensor origin."""

    radius: float = 100_000.0
    viewpoint_z: float = 0.0
    min_points_per_label: int = 5

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")


def spherical_flip(points, viewpoint, radius):
    """Reflect each point along its ray from the viewpoint to outside the
    sphere of the given radius: p -> p + 2(R - |p|) * p/|p| (p relative to C).
    """
    xyz = np.asarray(points, dtype=np.float64)[:, :3] - np.asarray(viewpoint, dtype=np.float64)
    norms = np.linalg.norm(xyz, axis=1)
    if len(norms) and norms.min() < VIEWPOINT_EPS:
        raise PointAtViewpoint(f"min distance {norms.min():g} m from viewpoint")
    if len(norms) and norms.max() > radius:
        # points exactly on the sphere are fixed points of the flip
        raise PointBeyondRadius(f"max distance {norms.max():g} m > radius {radius:g}")
    flipped = xyz * (2.0 * radius / norms - 1.0)[:, None]
    return flipped + np.asarray(viewpoint, dtype=np.float64)


def convex_hull_vertices(points, jitter=DEFAULT_JITTER):
    """Indices of points that are vertices of the 3D convex hull.

    Fewer than four points are all trivially vertices. Affinely degenerate
    inputs get a deterministic sub-sensor-precision jitter and one retry.
    """
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 4:
        return np.arange(len(pts))
    try:
        hull = ConvexHull(pts)
    except QhullError:
        noise = np.random.default_rng(0x5EED).normal(scale=jitter, size=pts.shape)
        hull = ConvexHull(pts + noise)
    return np.sort(hull.vertices)


def hpr_visible(points, viewpoint, radius, jitter=DEFAULT_JITTER):
    """Indices of points visible from the viewpoint under flip radius R."""
    pts = np.asarray(points, dtype=np.float64)
    flipped = spherical_flip(pts, viewpoint, radius)
    cloud = np.vstack([flipped, np.asarray(viewpoint, dtype=np.float64)[None, :]])
    verts = convex_hull_vertices(cloud, jitter=jitter)
    return verts[verts < len(pts)]


def s_hpr(obj: LabeledObject, lidar_origin=(0.0, 0.0, 0.0), radius_scale=DEFAULT_RADIUS_SCALE):
    """Self-occlusion for one placed object.

    The flip radius is the box diagonal times radius_scale, so the culling
    strength tracks the object's size and its distance from the sensor.
    The box is untouched; the point set can come back empty, in which case
    the caller drops the object.
    """
    if len(obj.points) == 0:
        return obj
    radius = radius_scale * box_diagonal(obj.box)
    visible = _visible_with_guard(obj.points, np.asarray(lidar_origin, dtype=np.float64), radius)
    return LabeledObject(obj.points[visible], obj.label, obj.box)


def e_hpr(frame: Frame, params: EHprParams = EHprParams()):
    """Frame-level occlusion over background and objects jointly.

    One visibility pass runs over the union of all points; each subset then
    keeps its survivors. Labels left with fewer than min_points_per_label
    survivors are deleted together with their residual points.
    """
    viewpoint = np.array([0.0, 0.0, params.viewpoint_z])
    chunks = [frame.background] + [o.points for o in frame.objects]
    sizes = [len(c) for c in chunks]
    union = np.vstack(chunks)
    if len(union) == 0:
        return Frame(frame.frame_id, frame.background, list(frame.objects))
    visible = _visible_with_guard(union, viewpoint, params.radius)
    mask = np.zeros(len(union), dtype=bool)
    mask[visible] = True

    bounds = np.cumsum([0] + sizes)
    background = frame.background[mask[bounds[0] : bounds[1]]]
    objects = []
    for i, obj in enumerate(frame.objects):
        keep = mask[bounds[i + 1] : bounds[i + 2]]
        survivors = int(keep.sum())
        if survivors >= params.min_points_per_label:
            objects.append(LabeledObject(obj.points[keep], obj.label, obj.box))
    return Frame(frame.frame_id, background, objects)


def _visible_with_guard(points, viewpoint, radius):
    """Visibility indices; points sitting on the viewpoint count as visible."""
    dist = np.linalg.norm(points[:, :3] - viewpoint, axis=1)
    at_view = dist < VIEWPOINT_EPS
    if not at_view.any():
        return hpr_visible(points, viewpoint, radius)
    rest = np.flatnonzero(~at_view)
    vis = hpr_visible(points[rest], viewpoint, radius)
    return np.sort(np.concatenate([np.flatnonzero(at_view), rest[vis]]))
