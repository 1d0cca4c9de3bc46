"""Shared fixture builders for the test suite.

Synthetic objects here are built from per-partition count templates so the
construction math (density tables, candidate ranking, whole-body checks)
has exactly known expected values.
"""

import numpy as np
import pytest

from drcpo import cli
from drcpo.database import build_database, grids_from_mapping
from drcpo.geometry import CLASSES, BoundingBox, Frame, LabeledObject


def cell_points(rng, grid, ext, q, count, margin=0.03):
    """``count`` points uniformly inside partition q of a centered box."""
    n = np.array(grid.shape)
    iz = q % grid.nz
    iy = (q // grid.nz) % grid.ny
    ix = q // (grid.nz * grid.ny)
    lo = (np.array([ix, iy, iz]) / n - 0.5) * ext
    hi = ((np.array([ix, iy, iz]) + 1) / n - 0.5) * ext
    span = hi - lo
    xyz = rng.uniform(lo + margin * span, hi - margin * span, (count, 3))
    return np.c_[xyz, rng.uniform(0.05, 0.95, count)]


def object_from_counts(rng, cls, extents, counts, grid, pose=None):
    """A canonical (or posed) object realizing exact per-partition counts."""
    ext = np.asarray(extents, dtype=np.float64)
    parts = [cell_points(rng, grid, ext, q, c) for q, c in enumerate(counts) if c > 0]
    local = np.vstack(parts) if parts else np.empty((0, 4))
    if pose is None:
        box = BoundingBox(0.0, 0.0, 0.0, *ext, 0.0)
        return LabeledObject(local, cls, box)
    x, y, z, theta = pose
    box = BoundingBox(x, y, z, *ext, theta)
    world = local.copy()
    c, s = np.cos(theta), np.sin(theta)
    world[:, 0] = c * local[:, 0] - s * local[:, 1] + x
    world[:, 1] = s * local[:, 0] + c * local[:, 1] + y
    world[:, 2] += z
    return LabeledObject(world, cls, box)


def half_template(rng, grid):
    """A y-symmetric count template, so mirroring doubles counts exactly."""
    tpl = rng.integers(5, 14, grid.shape)
    tpl = np.maximum(tpl, tpl[:, ::-1, :])
    return tpl.ravel()


def half_class_db(seed=0, population=24, k=12):
    """Car and Pedestrian classes of complementary half objects.

    Cars split along x (front/rear halves, exercising the mirror step);
    pedestrians along y (left/right halves, no mirroring). Every object of
    a class realizes the same template counts on its visible half, which
    makes the construction loop's trajectory exactly predictable.
    """
    rng = np.random.default_rng(seed)
    grids = grids_from_mapping(None)
    extents = {"Car": (4.0, 1.7, 1.5), "Pedestrian": (0.7, 0.7, 1.75)}
    templates = {cls: half_template(rng, grids[cls]) for cls in extents}
    frames = []
    for i in range(population):
        objs = []
        for cls, ext in extents.items():
            g = grids[cls]
            shape = np.zeros(g.shape, dtype=bool)
            if cls == "Car":
                half = g.nx // 2
                shape[half:] = i % 2 == 0
                shape[:half] = i % 2 == 1
            else:
                half = g.ny // 2
                shape[:, half:] = i % 2 == 0
                shape[:, :half] = i % 2 == 1
            counts = np.where(shape.ravel(), templates[cls], 0)
            pose = (rng.uniform(5, 50), rng.uniform(-25, 25), rng.uniform(-1.1, -0.7), rng.uniform(-np.pi, np.pi))
            objs.append(object_from_counts(rng, cls, ext, counts, g, pose=pose))
        frames.append(Frame(f"half_{i:03d}", np.empty((0, 4)), objs))
    return build_database(frames, k=k, grids=grids)


def ellipsoid_object(rng, n=900, noise=0.02, extents=(4.0, 1.7, 1.5)):
    """A whole-body-like shell: ellipsoid surface with radial noise."""
    l, w, h = extents
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = 1.0 + rng.normal(0, noise, n)
    local = np.empty((n, 4))
    local[:, 0] = np.clip(dirs[:, 0] * r * l / 2, -l / 2, l / 2)
    local[:, 1] = np.clip(dirs[:, 1] * r * w / 2, -w / 2, w / 2)
    local[:, 2] = np.clip(dirs[:, 2] * r * h / 2, -h / 2, h / 2)
    local[:, 3] = rng.uniform(0, 1, n)
    return LabeledObject(local, "Car", BoundingBox(0, 0, 0, l, w, h, 0))


def random_labeled_object(rng, n=60):
    ext = rng.uniform(0.8, 4.5, 3)
    cls = CLASSES[rng.integers(0, 3)]
    local = np.c_[
        rng.uniform(-0.5, 0.5, n) * ext[0],
        rng.uniform(-0.5, 0.5, n) * ext[1],
        rng.uniform(-0.5, 0.5, n) * ext[2],
        rng.uniform(0, 1, n),
    ]
    theta = rng.uniform(-np.pi, np.pi)
    cx, cy, cz = rng.uniform(-50, 50, 3)
    world = local.copy()
    c, s = np.cos(theta), np.sin(theta)
    world[:, 0] = c * local[:, 0] - s * local[:, 1] + cx
    world[:, 1] = s * local[:, 0] + c * local[:, 1] + cy
    world[:, 2] += cz
    return LabeledObject(world, cls, BoundingBox(cx, cy, cz, *ext, theta))


def write_corpus(dir_path, n_frames, seed=0, n_points=3000, n_objects=2):
    """Write a directory of synthetic .bin/.txt frame pairs; returns frame ids."""
    from drcpo.kitti_io import write_frame

    dir_path.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    ids = []
    for i in range(n_frames):
        frame = cli.synthetic_frame(rng, f"frame_{i:04d}", n_points=n_points, n_objects=n_objects)
        write_frame(frame, dir_path / f"{frame.frame_id}.bin", dir_path / f"{frame.frame_id}.txt")
        ids.append(frame.frame_id)
    return ids


@pytest.fixture(scope="session")
def synth_db():
    return cli.synthetic_database(np.random.default_rng(424242))


@pytest.fixture(scope="session")
def half_db():
    return half_class_db(seed=7)
