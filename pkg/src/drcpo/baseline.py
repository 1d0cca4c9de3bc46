"""Conventional data augmentation baseline: copy-paste sampling plus
global frame transforms (flip, scale, rotate).

Copy-pasted objects are restored at their stored original pose, so their
occlusion pattern stays valid; no construction and no visibility pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .database import GtDatabase
from .geometry import CLASSES, BoundingBox, Frame, LabeledObject, bev_overlap, from_canonical, normalize_angle

DEFAULT_GTS_COUNTS = {"Car": 20, "Pedestrian": 15, "Cyclist": 15}


@dataclass(frozen=True)
class GdaParams:
    flip_prob: float = 0.5
    scale_range: tuple = (0.95, 1.05)
    rotation_range: tuple = (-np.pi / 4.0, np.pi / 4.0)


def _transform_points(pts, flip, scale, angle):
    out = pts.copy()
    if flip:
        out[:, 1] = -out[:, 1]
    out[:, :3] *= scale
    c, s = np.cos(angle), np.sin(angle)
    x, y = out[:, 0].copy(), out[:, 1].copy()
    out[:, 0] = c * x - s * y
    out[:, 1] = s * x + c * y
    return out


def _transform_box(box: BoundingBox, flip, scale, angle):
    cx, cy, cz, theta = box.cx, box.cy, box.cz, box.theta
    if flip:
        cy, theta = -cy, -theta
    cx, cy, cz = cx * scale, cy * scale, cz * scale
    c, s = np.cos(angle), np.sin(angle)
    cx, cy = c * cx - s * cy, s * cx + c * cy
    return BoundingBox(
        cx, cy, cz, box.l * scale, box.w * scale, box.h * scale, normalize_angle(theta + angle)
    )


def global_augment(frame: Frame, rng, params: GdaParams = GdaParams()):
    """Whole-frame flip/scale/rotate; preserves point counts and memberships."""
    flip = bool(rng.uniform() < params.flip_prob)
    scale = float(rng.uniform(params.scale_range[0], params.scale_range[1]))
    angle = float(rng.uniform(params.rotation_range[0], params.rotation_range[1]))
    background = _transform_points(frame.background, flip, scale, angle)
    objects = [
        LabeledObject(
            _transform_points(o.points, flip, scale, angle),
            o.label,
            _transform_box(o.box, flip, scale, angle),
        )
        for o in frame.objects
    ]
    return Frame(frame.frame_id, background, objects)


def gts_sample(frame: Frame, db: GtDatabase, rng, counts=None):
    """Copy-paste database objects at their original stored poses.

    Objects whose restored box collides (in birds-eye view) with anything
    already in the frame are skipped.
    """
    counts = dict(DEFAULT_GTS_COUNTS, **(counts or {}))
    occupied = [o.box for o in frame.objects]
    added = []
    for cls in CLASSES:
        want = counts.get(cls, 0)
        pool = db.by_class[cls]
        if want <= 0 or not pool:
            continue
        take = min(want, len(pool))
        chosen = rng.choice(np.asarray(pool, dtype=np.int64), size=take, replace=False)
        for obj_id in chosen:
            src = db.objects[int(obj_id)]
            restored = from_canonical(LabeledObject(src.points, src.label, src.box), src.pose)
            if any(bev_overlap(restored.box, other) for other in occupied):
                continue
            added.append(restored)
            occupied.append(restored.box)
    return Frame(frame.frame_id, frame.background, list(frame.objects) + added)
