"""Ground-truth object database: extraction, density tables, candidate index.

One-time preprocessing over all training frames. Every annotated object is
stored in canonical pose (centered, zero heading) together with the pose
that restores it, a per-partition point-count profile, and the ranked list
of same-class objects best suited to fill its sparse partitions.
"""

from __future__ import annotations

import io
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadMagic, EmptyDatabase, TruncatedSection, UnsupportedVersion
from .geometry import CLASSES, BoundingBox, LabeledObject, Pose, to_canonical

log = logging.getLogger("drcpo.db")

MAGIC = b"DRPC"
VERSION = 1

# Default per-class partition grids (nx, ny, nz). Chosen to follow class
# aspect ratios: cars and cyclists are long, pedestrians are tall.
DEFAULT_GRIDS = {
    "Car": (4, 2, 2),
    "Pedestrian": (2, 2, 4),
    "Cyclist": (4, 2, 2),
}


@dataclass(frozen=True)
class PartitionGrid:
    """Fixed per-class subdivision of an object's box into nx*ny*nz cells."""

    label: str
    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError("partition counts must be >= 1")

    @property
    def size(self):
        return self.nx * self.ny * self.nz

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)


def grids_from_mapping(mapping=None):
    mapping = dict(DEFAULT_GRIDS, **(mapping or {}))
    return {cls: PartitionGrid(cls, *mapping[cls]) for cls in CLASSES}


def partition_indices(points, extents, grid: PartitionGrid):
    """Flat partition index per point, for a canonical cloud inside ``extents``.

    Cell indices are floor((p + extent/2) / extent * n) per axis, clamped to
    the grid, then flattened x-major.
    """
    pts = np.asarray(points, dtype=np.float64)
    ext = np.asarray(extents, dtype=np.float64)
    n = np.array(grid.shape)
    if len(pts) == 0:
        return np.empty(0, dtype=np.int64)
    cell = np.floor((pts[:, :3] + ext / 2.0) / ext * n).astype(np.int64)
    np.clip(cell, 0, n - 1, out=cell)
    return (cell[:, 0] * grid.ny + cell[:, 1]) * grid.nz + cell[:, 2]


def partition_counts(obj: LabeledObject, grid: PartitionGrid):
    """Points per partition of a canonical object, as an int64 vector."""
    idx = partition_indices(obj.points, obj.box.extents, grid)
    return np.bincount(idx, minlength=grid.size).astype(np.int64)


def partition_densities(counts, maxima):
    """Normalize raw partition counts by the class-wide per-partition maxima.

    Empty partitions across the whole class (max 0) get density 0.
    """
    counts = np.asarray(counts, dtype=np.float64)
    maxima = np.asarray(maxima, dtype=np.float64)
    out = np.zeros_like(counts)
    np.divide(counts, maxima, out=out, where=maxima > 0)
    return out


@dataclass
class DbObject:
    """One extracted object in canonical pose plus its restore pose."""

    obj_id: int
    label: str
    points: np.ndarray  # (N, 4) float64, canonical
    box: BoundingBox  # centered, zero heading
    pose: Pose  # original world placement
    frame_id: str
    counts: np.ndarray = field(default=None, repr=False)
    densities: np.ndarray = field(default=None, repr=False)


class GtDatabase:
    """All extracted objects plus density tables and the candidate index."""

    def __init__(self, objects, grids, k, frame_ids):
        self.objects: list[DbObject] = objects
        self.grids: dict[str, PartitionGrid] = grids
        self.k = k
        self.frame_ids = list(frame_ids)
        self.by_class = {cls: [o.obj_id for o in objects if o.label == cls] for cls in CLASSES}
        self.class_maxima = {}
        self.candidates: dict[int, np.ndarray] = {}
        # complement_step lookups: per object, points grouped by partition
        self._part_points = {}
        self._part_starts = {}
        self._refresh_tables()

    def _refresh_tables(self):
        for obj in self.objects:
            obj.counts = partition_counts(LabeledObject(obj.points, obj.label, obj.box), self.grids[obj.label])
        for cls in CLASSES:
            ids = self.by_class[cls]
            size = self.grids[cls].size
            if ids:
                stacked = np.stack([self.objects[i].counts for i in ids])
                self.class_maxima[cls] = stacked.max(axis=0)
            else:
                self.class_maxima[cls] = np.zeros(size, dtype=np.int64)
        for obj in self.objects:
            obj.densities = partition_densities(obj.counts, self.class_maxima[obj.label])
        self._build_partition_lookup()

    def _build_partition_lookup(self):
        for obj in self.objects:
            grid = self.grids[obj.label]
            idx = partition_indices(obj.points, obj.box.extents, grid)
            order = np.argsort(idx, kind="stable")
            starts = np.searchsorted(idx[order], np.arange(grid.size + 1))
            self._part_points[obj.obj_id] = obj.points[order]
            self._part_starts[obj.obj_id] = starts

    def points_in_partition(self, obj_id, part):
        """Points of one object lying in one partition, in storage order.

        Returns a read-only view into the partition-sorted copy.
        """
        starts = self._part_starts[obj_id]
        return self._part_points[obj_id][starts[part] : starts[part + 1]]

    def total_objects(self):
        return len(self.objects)

    def class_count(self, cls):
        return len(self.by_class[cls])


def _deficient_partitions(densities):
    """Partitions with density strictly below the mean over non-empty ones.

    Objects with no points at all treat every partition as deficient.
    """
    densities = np.asarray(densities, dtype=np.float64)
    nonempty = densities > 0
    if not nonempty.any():
        return np.ones(len(densities), dtype=bool)
    mean = densities[nonempty].mean()
    return densities < mean


def index_candidates(db: GtDatabase, k):
    """Rank, per object, the K same-class objects best suited to complete it.

    Two stages: take the 2K most box-similar objects, then keep the K of
    those with the highest summed density over the source's deficient
    partitions. Ties break by box similarity, then ascending object id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    candidates = {}
    for cls in CLASSES:
        ids = db.by_class[cls]
        if not ids:
            continue
        if len(ids) < 2:
            # nothing to pair with; index whatever exists (an empty list)
            candidates[ids[0]] = np.empty(0, dtype=np.int64)
            log.debug("class %s has %d object(s); candidate list left empty", cls, len(ids))
            continue
        ext = np.array([db.objects[i].box.extents for i in ids])  # (n, 3)
        vol = ext[:, 0] * ext[:, 1] * ext[:, 2]
        dens = np.stack([db.objects[i].densities for i in ids])  # (n, P)
        id_arr = np.array(ids, dtype=np.int64)
        for row, i in enumerate(ids):
            inter = np.minimum(ext, ext[row]).prod(axis=1)
            sim = inter / (vol + vol[row] - inter)
            others = np.arange(len(ids)) != row
            order = np.lexsort((id_arr[others], -sim[others]))
            pool = np.flatnonzero(others)[order][: 2 * k]
            deficient = _deficient_partitions(dens[row])
            scores = dens[pool][:, deficient].sum(axis=1)
            keep = np.lexsort((id_arr[pool], -sim[pool], -scores))[:k]
            candidates[i] = id_arr[pool[keep]]
    return candidates


def build_database(frames, k=400, grids=None):
    """Extract all objects from frames and build the full database.

    Deterministic given frame order: objects are numbered in (frame, label)
    order and every table derives from that ordering.
    """
    if grids is None:
        grids = grids_from_mapping(None)
    elif not isinstance(next(iter(grids.values())), PartitionGrid):
        grids = grids_from_mapping(grids)
    objects = []
    frame_ids = []
    for frame in frames:
        frame_ids.append(frame.frame_id)
        for obj in frame.objects:
            canon, pose = to_canonical(obj)
            objects.append(
                DbObject(len(objects), canon.label, canon.points, canon.box, pose, frame.frame_id)
            )
    if not objects:
        raise EmptyDatabase("no labeled objects found in input frames")
    db = GtDatabase(objects, grids, k, frame_ids)
    db.candidates = index_candidates(db, k)
    return db


# ---------------------------------------------------------------------------
# Persistence: magic + version, then four length-prefixed little-endian
# sections (metadata JSON, object table, density table, candidate index).
# ---------------------------------------------------------------------------


def _write_section(fh, payload: bytes):
    fh.write(struct.pack("<Q", len(payload)))
    fh.write(payload)


def _read_section(fh, name):
    header = fh.read(8)
    if len(header) != 8:
        raise TruncatedSection(f"missing length prefix for section {name}")
    (length,) = struct.unpack("<Q", header)
    payload = fh.read(length)
    if len(payload) != length:
        raise TruncatedSection(f"section {name}: expected {length} bytes, got {len(payload)}")
    return payload


def save_database(db: GtDatabase, path):
    """Serialize the database; identical inputs produce identical bytes."""
    meta = {
        "k": db.k,
        "grids": {cls: list(db.grids[cls].shape) for cls in CLASSES},
        "frame_ids": db.frame_ids,
        "classes": list(CLASSES),
    }
    frame_index = {fid: n for n, fid in enumerate(db.frame_ids)}

    obj_buf = io.BytesIO()
    obj_buf.write(struct.pack("<I", len(db.objects)))
    for o in db.objects:
        obj_buf.write(struct.pack("<BI", CLASSES.index(o.label), frame_index[o.frame_id]))
        obj_buf.write(np.array([o.box.l, o.box.w, o.box.h], dtype="<f8").tobytes())
        obj_buf.write(np.array([o.pose.x, o.pose.y, o.pose.z, o.pose.theta], dtype="<f8").tobytes())
        obj_buf.write(struct.pack("<Q", len(o.points)))
        obj_buf.write(o.points.astype("<f8").tobytes())

    dens_buf = io.BytesIO()
    for cls in CLASSES:
        maxima = db.class_maxima[cls]
        dens_buf.write(struct.pack("<I", len(maxima)))
        dens_buf.write(maxima.astype("<i8").tobytes())
    for o in db.objects:
        dens_buf.write(struct.pack("<I", len(o.counts)))
        dens_buf.write(o.counts.astype("<i8").tobytes())

    cand_buf = io.BytesIO()
    for o in db.objects:
        ids = db.candidates.get(o.obj_id, np.empty(0, dtype=np.int64))
        cand_buf.write(struct.pack("<I", len(ids)))
        cand_buf.write(np.asarray(ids, dtype="<i8").tobytes())

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        _write_section(fh, json.dumps(meta, sort_keys=True).encode())
        _write_section(fh, obj_buf.getvalue())
        _write_section(fh, dens_buf.getvalue())
        _write_section(fh, cand_buf.getvalue())


def _take(buf: memoryview, n, name):
    if len(buf) < n:
        raise TruncatedSection(f"section {name}: ran out of bytes")
    return buf[:n], buf[n:]


def load_database(path) -> GtDatabase:
    """Load a database written by save_database."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise BadMagic(f"{path}: expected {MAGIC!r}, got {magic!r}")
        raw_ver = fh.read(4)
        if len(raw_ver) != 4:
            raise TruncatedSection("missing version field")
        (version,) = struct.unpack("<I", raw_ver)
        if version != VERSION:
            raise UnsupportedVersion(f"version {version} (supported: {VERSION})")
        meta = json.loads(_read_section(fh, "metadata").decode())
        obj_payload = memoryview(_read_section(fh, "objects"))
        dens_payload = memoryview(_read_section(fh, "densities"))
        cand_payload = memoryview(_read_section(fh, "candidates"))

    grids = grids_from_mapping({cls: tuple(v) for cls, v in meta["grids"].items()})
    frame_ids = meta["frame_ids"]

    head, obj_payload = _take(obj_payload, 4, "objects")
    (count,) = struct.unpack("<I", head)
    objects = []
    for obj_id in range(count):
        head, obj_payload = _take(obj_payload, 5, "objects")
        cls_idx, fid_idx = struct.unpack("<BI", head)
        head, obj_payload = _take(obj_payload, 24, "objects")
        l, w, h = np.frombuffer(head, dtype="<f8")
        head, obj_payload = _take(obj_payload, 32, "objects")
        px, py, pz, ptheta = np.frombuffer(head, dtype="<f8")
        head, obj_payload = _take(obj_payload, 8, "objects")
        (npts,) = struct.unpack("<Q", head)
        head, obj_payload = _take(obj_payload, int(npts) * 32, "objects")
        pts = np.frombuffer(head, dtype="<f8").reshape(-1, 4).copy()
        objects.append(
            DbObject(
                obj_id,
                CLASSES[cls_idx],
                pts,
                BoundingBox(0.0, 0.0, 0.0, l, w, h, 0.0),
                Pose(px, py, pz, ptheta),
                frame_ids[fid_idx],
            )
        )

    db = GtDatabase(objects, grids, meta["k"], frame_ids)

    # density section is derivable; verify shape consistency while skipping it
    for cls in CLASSES:
        head, dens_payload = _take(dens_payload, 4, "densities")
        (n,) = struct.unpack("<I", head)
        _, dens_payload = _take(dens_payload, n * 8, "densities")
    for _ in objects:
        head, dens_payload = _take(dens_payload, 4, "densities")
        (n,) = struct.unpack("<I", head)
        _, dens_payload = _take(dens_payload, n * 8, "densities")

    candidates = {}
    for o in objects:
        head, cand_payload = _take(cand_payload, 4, "candidates")
        (n,) = struct.unpack("<I", head)
        head, cand_payload = _take(cand_payload, n * 8, "candidates")
        candidates[o.obj_id] = np.frombuffer(head, dtype="<i8").copy()
    db.candidates = candidates
    return db
