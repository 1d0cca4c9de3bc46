"""Random placement of constructed objects with collision avoidance.

Poses are sampled uniformly over the detection range in x/y and over the
configured heading interval; height keeps the source object's original
box center so objects stay on plausible ground without a terrain model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import CLASSES, BoundingBox, Frame, LabeledObject, Pose, from_canonical


def _default_counts():
    return {cls: 10 for cls in CLASSES}


@dataclass(frozen=True)
class PlacementConfig:
    x_range: tuple = (0.0, 70.4)
    y_range: tuple = (-40.0, 40.0)
    rotation_range: tuple = (-np.pi, np.pi)
    objects_per_class: dict = field(default_factory=_default_counts)
    max_attempts: int = 30

    def __post_init__(self):
        for lo, hi in (self.x_range, self.y_range, self.rotation_range):
            if hi < lo:
                raise ValueError("ranges must satisfy low <= high")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if any(v < 0 for v in self.objects_per_class.values()):
            raise ValueError("object counts must be >= 0")


def sample_pose(rng, config: PlacementConfig, source_cz):
    """Draw one candidate pose: x, y, heading uniform; z keeps the source height."""
    x = rng.uniform(config.x_range[0], config.x_range[1])
    y = rng.uniform(config.y_range[0], config.y_range[1])
    theta = rng.uniform(config.rotation_range[0], config.rotation_range[1])
    return Pose(x, y, source_cz, theta)


class _OccupiedFootprints:
    """Stacked BEV corners and edge axes of accepted boxes, so one candidate
    can be tested against all of them in a few vectorized operations."""

    def __init__(self, boxes=()):
        self.corners = np.empty((0, 4, 2))
        self.axes = np.empty((0, 2, 2))
        for box in boxes:
            self.add(box)

    def add(self, box: BoundingBox):
        c, s = np.cos(box.theta), np.sin(box.theta)
        self.corners = np.concatenate([self.corners, box.corners_bev()[None]])
        self.axes = np.concatenate([self.axes, np.array([[[c, s], [-s, c]]])])

    def overlaps_any(self, box: BoundingBox):
        if len(self.corners) == 0:
            return False
        cand = box.corners_bev()
        c, s = np.cos(box.theta), np.sin(box.theta)
        cand_axes = np.array([[c, s], [-s, c]])
        # candidate's axes: project everything once
        own = cand @ cand_axes.T  # (4, 2)
        theirs = self.corners @ cand_axes.T  # (n, 4, 2)
        sep = (theirs.max(axis=1) < own.min(axis=0)) | (theirs.min(axis=1) > own.max(axis=0))
        separated = sep.any(axis=1)
        # each occupied box's axes
        own_on = np.einsum("ck,nak->nca", cand, self.axes)  # (n, 4, 2)
        their_on = np.einsum("nck,nak->nca", self.corners, self.axes)
        sep2 = (their_on.max(axis=1) < own_on.min(axis=1)) | (their_on.min(axis=1) > own_on.max(axis=1))
        separated |= sep2.any(axis=1)
        return bool(np.any(~separated))


def try_place(obj: LabeledObject, occupied, source_cz, config: PlacementConfig, rng):
    """Place a canonical object at the first collision-free sampled pose.

    Tries up to max_attempts poses against the occupied box list (a list of
    boxes or an _OccupiedFootprints); returns the placed object, or None if
    every attempt collided.
    """
    if not isinstance(occupied, _OccupiedFootprints):
        occupied = _OccupiedFootprints(occupied)
    for _ in range(config.max_attempts):
        pose = sample_pose(rng, config, source_cz)
        candidate = BoundingBox(
            pose.x, pose.y, source_cz, obj.box.l, obj.box.w, obj.box.h, pose.theta
        )
        if not occupied.overlaps_any(candidate):
            return from_canonical(obj, pose)
    return None


def place_all(frame: Frame, constructed, config: PlacementConfig, rng):
    """Insert constructed objects into a frame, dropping ones that never fit.

    ``constructed`` maps class name to a list of (object, source_cz) pairs.
    Classes are processed in the fixed Car, Pedestrian, Cyclist order so a
    seeded run is reproducible.
    """
    occupied = _OccupiedFootprints(o.box for o in frame.objects)
    placed = []
    for cls in CLASSES:
        for obj, source_cz in constructed.get(cls, []):
            result = try_place(obj, occupied, source_cz, config, rng)
            if result is not None:
                placed.append(result)
                occupied.add(result.box)
    return Frame(frame.frame_id, frame.background, list(frame.objects) + placed)
