"""End-to-end frame augmentation and deterministic seeding.

Every frame's randomness derives from a single 64-bit frame seed, itself a
stable hash of (master seed, frame id). Sub-streams for source selection,
per-object construction, placement, and the baseline transforms use fixed
spawn keys, so outputs are identical no matter how frames are scheduled
across workers.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from .baseline import global_augment, gts_sample
from .config import PipelineConfig
from .construction import construct_whole_body
from .database import GtDatabase
from .geometry import CLASSES, Frame
from .hpr import e_hpr, s_hpr
from .placement import place_all

STREAM_SELECT = 1
STREAM_CONSTRUCT = 2
STREAM_PLACE = 3
STREAM_BASELINE = 4

STAGES = ("raw", "constructed", "placed", "shpr", "ehpr")


def frame_seed(master_seed, frame_id):
    """Stable 64-bit seed for one frame, independent of processing order."""
    digest = hashlib.blake2b(f"{master_seed}:{frame_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def rng_stream(seed, *key):
    """Deterministic child generator for one pipeline stage."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


@dataclass
class FrameStats:
    frame_id: str
    objects: dict = field(default_factory=dict)  # final per-class counts
    placed: dict = field(default_factory=dict)  # newly added per-class counts
    total_points: int = 0
    construction_iterations: list = field(default_factory=list)
    durations: dict = field(default_factory=dict)  # stage -> seconds

    def to_record(self):
        return {
            "frame_id": self.frame_id,
            "objects": self.objects,
            "placed": self.placed,
            "total_points": self.total_points,
            "construction_iterations": self.construction_iterations,
            "durations": {k: round(v, 6) for k, v in self.durations.items()},
        }


def augment_frame(frame: Frame, db, config: PipelineConfig, seed):
    """Augment one frame; fully determined by (frame, db, config, seed)."""
    out, stats, _ = _augment(frame, db, config, seed, capture=False)
    return out, stats


def augment_frame_stages(frame: Frame, db, config: PipelineConfig, seed):
    """Like augment_frame but also returns per-stage frame snapshots."""
    return _augment(frame, db, config, seed, capture=True)


def _augment(frame: Frame, db: GtDatabase | None, config, seed, capture):
    stats = FrameStats(frame_id=frame.frame_id)
    stages = {"raw": frame} if capture else None

    if config.mode == "none":
        out = frame
    elif config.mode == "cda":
        t0 = time.perf_counter()
        out = gts_sample(frame, db, rng_stream(seed, STREAM_BASELINE, 0), config.cda_counts)
        stats.durations["gts"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        out = global_augment(out, rng_stream(seed, STREAM_BASELINE, 1), config.gda)
        stats.durations["gda"] = time.perf_counter() - t0
        if capture:
            stages["placed"] = out
    else:
        out = _augment_drcpo(frame, db, config, seed, stats, stages)

    stats.objects = out.class_counts()
    stats.total_points = out.total_points
    return out, stats, stages


def _augment_drcpo(frame, db, config, seed, stats, stages):
    before = frame.class_counts()

    t0 = time.perf_counter()
    constructed = {}
    for ci, cls in enumerate(CLASSES):
        want = config.placement.objects_per_class.get(cls, 0)
        pool = db.by_class[cls]
        if want <= 0 or not pool:
            constructed[cls] = []
            continue
        sel = rng_stream(seed, STREAM_SELECT, ci)
        ids = np.asarray(pool, dtype=np.int64)
        chosen = sel.choice(ids, size=want, replace=len(ids) < want)
        built = []
        for slot, source_id in enumerate(chosen):
            obj, _info = construct_whole_body(
                int(source_id), db, config.construction, rng_stream(seed, STREAM_CONSTRUCT, ci, slot)
            )
            stats.construction_iterations.append(_info.iterations)
            built.append((obj, db.objects[int(source_id)].pose.z))
        constructed[cls] = built
    stats.durations["construction"] = time.perf_counter() - t0
    if stages is not None:
        stages["constructed"] = [obj for cls in CLASSES for obj, _ in constructed[cls]]

    t0 = time.perf_counter()
    placed = place_all(frame, constructed, config.placement, rng_stream(seed, STREAM_PLACE))
    stats.durations["placement"] = time.perf_counter() - t0
    if stages is not None:
        stages["placed"] = placed

    t0 = time.perf_counter()
    survivors = list(placed.objects[: len(frame.objects)])
    for obj in placed.objects[len(frame.objects) :]:
        culled = s_hpr(obj, radius_scale=config.shpr_radius_scale.get(obj.label, 200.0))
        if len(culled) > 0:
            survivors.append(culled)
    shpr_frame = Frame(placed.frame_id, placed.background, survivors)
    stats.durations["shpr"] = time.perf_counter() - t0
    if stages is not None:
        stages["shpr"] = shpr_frame

    t0 = time.perf_counter()
    out = e_hpr(shpr_frame, config.ehpr)
    stats.durations["ehpr"] = time.perf_counter() - t0
    if stages is not None:
        stages["ehpr"] = out

    if config.gda_enabled:
        t0 = time.perf_counter()
        out = global_augment(out, rng_stream(seed, STREAM_BASELINE, 1), config.gda)
        stats.durations["gda"] = time.perf_counter() - t0

    after = out.class_counts()
    stats.placed = {cls: max(0, after[cls] - before[cls]) for cls in CLASSES}
    return out
