"""Whole-body object construction.

A source object is mirrored across its symmetry plane (cars and cyclists
only), then repeatedly complemented: every partition independently samples
one of the source's indexed candidates and absorbs that candidate's points
for the partition, rescaled into the source box. The loop stops once the
density profile qualifies as whole-body, or at the iteration cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .database import GtDatabase, partition_counts, partition_densities
from .geometry import LabeledObject, mirror_x

MIRRORED_CLASSES = ("Car", "Cyclist")


@dataclass(frozen=True)
class ConstructionConfig:
    whole_body_threshold: float = 0.85
    max_iterations: int = 20
    dedup_epsilon: float = 0.01  # meters

    def __post_init__(self):
        if not (0.0 < self.whole_body_threshold <= 1.0):
            raise ValueError("whole_body_threshold must be in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.dedup_epsilon < 0:
            raise ValueError("dedup_epsilon must be >= 0")


@dataclass
class ConstructionInfo:
    iterations: int = 0
    whole_body: bool = False
    no_candidates: bool = False


def is_whole_body(densities, threshold):
    """Whole-body test: enough partitions sit at or above the non-empty mean.

    The mean is taken over non-empty partitions only, but the qualifying
    proportion is measured against all partitions. Objects with no points
    anywhere never qualify.
    """
    densities = np.asarray(densities, dtype=np.float64)
    nonempty = densities > 0
    if not nonempty.any():
        return False
    mean = densities[nonempty].mean()
    high = np.count_nonzero(densities >= mean)
    return high / len(densities) >= threshold


def dedup_points(points, epsilon):
    """Keep the first point per epsilon-sized voxel, preserving input order."""
    if epsilon <= 0 or len(points) == 0:
        return points
    cell = np.floor(points[:, :3] / epsilon).astype(np.int64)
    # pack the three cell coordinates into one key; 2^20 cells per axis is
    # far beyond any detection range at centimeter resolution
    key = ((cell[:, 0] & 0xFFFFF) << 40) | ((cell[:, 1] & 0xFFFFF) << 20) | (cell[:, 2] & 0xFFFFF)
    _, first = np.unique(key, return_index=True)
    return points[np.sort(first)]


def complement_step(obj: LabeledObject, db: GtDatabase, candidate_ids, rng):
    """One complementing pass: per partition, absorb a random candidate's points.

    Candidate points are looked up by partition in the candidate's own
    canonical frame and rescaled per axis by the extent ratio so they land
    inside the source box. Intensities pass through untouched.
    """
    candidate_ids = np.asarray(candidate_ids, dtype=np.int64)
    if len(candidate_ids) == 0:
        return obj
    grid = db.grids[obj.label]
    src_ext = obj.box.extents
    draws = rng.integers(0, len(candidate_ids), size=grid.size)
    chunks = []
    ratios = []
    ratio_cache = {}
    for part in range(grid.size):
        cid = int(candidate_ids[draws[part]])
        starts = db._part_starts[cid]
        if starts[part + 1] == starts[part]:
            continue
        chunks.append(db._part_points[cid][starts[part] : starts[part + 1]])
        if cid not in ratio_cache:
            ratio_cache[cid] = src_ext / db.objects[cid].box.extents
        ratios.append(ratio_cache[cid])
    if not chunks:
        return obj
    added = np.vstack(chunks)
    factors = np.repeat(np.asarray(ratios), [len(c) for c in chunks], axis=0)
    added[:, :3] *= factors
    pts = np.vstack([obj.points, added])
    return LabeledObject(pts, obj.label, obj.box)


def construct_whole_body(source_id, db: GtDatabase, config: ConstructionConfig, rng):
    """Build a whole-body object from one database source.

    Returns the constructed object (canonical pose) and a ConstructionInfo
    with the iteration count and termination reason. The point count never
    drops below the source's as long as source points are epsilon-separated.
    """
    src = db.objects[source_id]
    pts = src.points.copy()
    if src.label in MIRRORED_CLASSES:
        pts = mirror_x(pts)
    obj = LabeledObject(pts, src.label, src.box)

    info = ConstructionInfo()
    candidate_ids = db.candidates.get(source_id, np.empty(0, dtype=np.int64))
    if len(candidate_ids) == 0:
        info.no_candidates = True

    maxima = db.class_maxima[src.label]
    grid = db.grids[src.label]
    densities = partition_densities(partition_counts(obj, grid), maxima)
    while not is_whole_body(densities, config.whole_body_threshold):
        if info.no_candidates or info.iterations >= config.max_iterations:
            break
        obj = complement_step(obj, db, candidate_ids, rng)
        info.iterations += 1
        densities = partition_densities(partition_counts(obj, grid), maxima)
    info.whole_body = is_whole_body(densities, config.whole_body_threshold)

    obj = LabeledObject(dedup_points(obj.points, config.dedup_epsilon), obj.label, obj.box)
    return obj, info
