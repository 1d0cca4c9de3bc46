"""Command-line surface: build-db, augment, stats, bench, export-ply.

Exit codes: 0 success, 1 partial or total failure, 2 usage error. The
DRCPO_LOG environment variable sets the log level (default WARNING).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import database, kitti_io, pipeline, report
from .config import PipelineConfig
from .errors import DrcpoError
from .geometry import CLASSES, BoundingBox, Frame, LabeledObject

log = logging.getLogger("drcpo")


def _setup_logging():
    level = os.environ.get("DRCPO_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _load_config(path):
    return PipelineConfig.from_file(path) if path else PipelineConfig()


def _frame_pairs(data_dir, label_format="native"):
    """Yield (frame_id, cloud_path, label_path[, calib_path]) found under a directory."""
    root = Path(data_dir)
    if label_format == "kitti":
        clouds = sorted((root / "velodyne").glob("*.bin"))
        for cloud in clouds:
            label = root / "label_2" / f"{cloud.stem}.txt"
            calib = root / "calib" / f"{cloud.stem}.txt"
            if label.exists() and calib.exists():
                yield cloud.stem, cloud, label, calib
    else:
        for cloud in sorted(root.glob("*.bin")):
            label = cloud.with_suffix(".txt")
            if label.exists():
                yield cloud.stem, cloud, label, None


def _load_frame_any(frame_id, cloud, label, calib):
    points = kitti_io.read_velodyne_bin(cloud)
    if calib is not None:
        labels = kitti_io.read_kitti_labels(label, calib)
    else:
        labels = kitti_io.read_labels(label)
    return kitti_io.split_frame(points, labels, frame_id=frame_id)


# ---------------------------------------------------------------------------
# build-db
# ---------------------------------------------------------------------------


def cmd_build_db(args):
    config = _load_config(args.config)
    pairs = list(_frame_pairs(args.data_dir, args.label_format))
    if not pairs:
        print(f"error: no frame files found under {args.data_dir}", file=sys.stderr)
        return 1
    frames = (_load_frame_any(*pair) for pair in pairs)
    try:
        db = database.build_database(frames, k=config.k, grids=config.grids)
    except DrcpoError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    database.save_database(db, args.out)
    for cls in CLASSES:
        print(f"{cls}: {db.class_count(cls)} objects")
    print(f"wrote {args.out} ({db.total_objects()} objects from {len(pairs)} frames)")
    return 0


# ---------------------------------------------------------------------------
# augment
# ---------------------------------------------------------------------------

_WORKER_STATE = {}


def _worker_init(db_path, config_text):
    _WORKER_STATE["db"] = database.load_database(db_path) if db_path else None
    _WORKER_STATE["config"] = PipelineConfig.from_text(config_text)


def _worker_augment(task):
    frame_id, cloud, label, out_dir = task
    db = _WORKER_STATE["db"]
    config = _WORKER_STATE["config"]
    out_dir = Path(out_dir)
    frame = _load_frame_any(frame_id, Path(cloud), Path(label), None)
    seed = pipeline.frame_seed(config.master_seed, frame_id)
    out, stats = pipeline.augment_frame(frame, db, config, seed)
    if config.mode == "none":
        # pass-through is bit-for-bit: copy the original bytes verbatim
        (out_dir / f"{frame_id}.bin").write_bytes(Path(cloud).read_bytes())
        (out_dir / f"{frame_id}.txt").write_bytes(Path(label).read_bytes())
    else:
        kitti_io.write_frame(out, out_dir / f"{frame_id}.bin", out_dir / f"{frame_id}.txt")
    return stats.to_record()


def cmd_augment(args):
    config = _load_config(args.config)
    if args.seed is not None:
        config.master_seed = args.seed
    if args.workers is not None:
        config.workers = args.workers
    pairs = [(fid, str(c), str(l)) for fid, c, l, _ in _frame_pairs(args.frames)]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    needs_db = config.mode in ("cda", "drcpo")
    if needs_db and not args.db:
        print("error: --db is required for cda/drcpo modes", file=sys.stderr)
        return 2

    records = {}
    failures = 0
    tasks = [(fid, cloud, label, str(out_dir)) for fid, cloud, label in pairs]
    config_text = config.to_text()
    if config.workers > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=config.workers,
            initializer=_worker_init,
            initargs=(args.db if needs_db else None, config_text),
        ) as pool:
            futures = {pool.submit(_worker_augment, t): t[0] for t in tasks}
            for fut in concurrent.futures.as_completed(futures):
                fid = futures[fut]
                try:
                    records[fid] = fut.result()
                except Exception as exc:
                    failures += 1
                    log.error("frame %s failed: %s", fid, exc)
    else:
        _worker_init(args.db if needs_db else None, config_text)
        for task in tasks:
            try:
                records[task[0]] = _worker_augment(task)
            except Exception as exc:
                failures += 1
                log.error("frame %s failed: %s", task[0], exc)

    manifest = out_dir / "manifest.jsonl"
    with open(manifest, "w") as fh:
        fh.write(json.dumps({"type": "config", "config": config.to_flat()}, sort_keys=True) + "\n")
        for fid in sorted(records):
            fh.write(json.dumps({"type": "frame", **records[fid]}, sort_keys=True) + "\n")
    print(f"augmented {len(records)} frame(s), {failures} failure(s); manifest at {manifest}")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def cmd_stats(args):
    records = []
    for fid, cloud, label, _ in _frame_pairs(args.frames):
        frame = _load_frame_any(fid, cloud, label, None)
        records.append(
            {"frame_id": fid, "objects": frame.class_counts(), "total_points": frame.total_points}
        )
    if not records:
        print(f"error: no frames under {args.frames}", file=sys.stderr)
        return 1
    summary = report.write_stats_report(records, args.out)
    print(f"frames: {summary['frames']}")
    for cls in CLASSES:
        print(f"{cls} objects/frame: {summary['avg_objects'][cls]:.2f}")
    print(f"total points/frame: {summary['avg_points']:.1f}")
    print(f"report written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def synthetic_frame(rng, frame_id="synthetic", n_points=18000, n_objects=3):
    """A road-like frame: noisy ground plane, a wall, and a few labeled objects."""
    n_ground = int(n_points * 0.72)
    n_wall = int(n_points * 0.2)
    ground = np.c_[
        rng.uniform(2.0, 70.4, n_ground),
        rng.uniform(-40.0, 40.0, n_ground),
        rng.normal(-1.73, 0.02, n_ground),
        rng.uniform(0.1, 0.9, n_ground),
    ]
    wall_x = rng.uniform(25.0, 60.0)
    wall = np.c_[
        np.full(n_wall, wall_x) + rng.normal(0, 0.03, n_wall),
        rng.uniform(-30.0, 30.0, n_wall),
        rng.uniform(-1.73, 1.5, n_wall),
        rng.uniform(0.1, 0.9, n_wall),
    ]
    objects = []
    n_obj_pts = n_points - n_ground - n_wall
    per = max(n_obj_pts // max(n_objects, 1), 1)
    for i in range(n_objects):
        cx, cy = rng.uniform(8, 50), rng.uniform(-20, 20)
        box = BoundingBox(cx, cy, -0.9, 3.9, 1.6, 1.5, rng.uniform(-np.pi, np.pi))
        local = np.c_[
            rng.uniform(-1.9, 1.9, per),
            rng.uniform(-0.75, 0.75, per),
            rng.uniform(-0.7, 0.7, per),
            rng.uniform(0.1, 0.9, per),
        ]
        c, s = np.cos(box.theta), np.sin(box.theta)
        pts = local.copy()
        pts[:, 0] = c * local[:, 0] - s * local[:, 1] + cx
        pts[:, 1] = s * local[:, 0] + c * local[:, 1] + cy
        pts[:, 2] += box.cz
        objects.append(LabeledObject(pts, "Car", box))
    return Frame(frame_id, np.vstack([ground, wall]), objects)


def synthetic_database(rng, per_class=40, k=20, density_scale=1.0):
    """A compact database of partially observed objects for benchmarks and smoke tests.

    Per class, every object realizes the same y-symmetric per-partition
    count template over either the front or the rear half of its box, so
    each object's candidate list is exactly the complementary halves and
    the complementing loop converges in one or two iterations the way
    field data does.
    """
    extents = {"Car": (4.0, 1.7, 1.5), "Pedestrian": (0.7, 0.7, 1.75), "Cyclist": (1.8, 0.7, 1.7)}
    grids = database.grids_from_mapping(None)
    templates = {}
    for cls in CLASSES:
        g = grids[cls]
        tpl = rng.integers(6, 18, g.shape)
        tpl = np.maximum(tpl, tpl[:, ::-1, :])  # symmetric across y so mirroring doubles counts
        templates[cls] = np.maximum((tpl * density_scale).astype(int), 1)

    frames = []
    for i in range(per_class):
        objs = []
        for cls in CLASSES:
            g = grids[cls]
            l, w, h = (e * rng.uniform(0.92, 1.08) for e in extents[cls])
            ext = np.array([l, w, h])
            n = np.array(g.shape)
            keep = np.zeros(g.shape, dtype=bool)
            half = g.nx // 2 or 1
            if i % 2 == 0:
                keep[half:] = True  # front half observed
            else:
                keep[:half] = True  # rear half observed
            pts = []
            for q in np.flatnonzero(keep.ravel()):
                iz = q % g.nz
                iy = (q // g.nz) % g.ny
                ix = q // (g.nz * g.ny)
                m = templates[cls].ravel()[q]
                lo = (np.array([ix, iy, iz]) / n - 0.5) * ext
                hi = ((np.array([ix, iy, iz]) + 1) / n - 0.5) * ext
                cell = rng.uniform(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo), (m, 3))
                pts.append(np.c_[cell, rng.uniform(0.05, 0.95, m)])
            local = np.vstack(pts)
            box = BoundingBox(
                rng.uniform(5, 60), rng.uniform(-30, 30), rng.uniform(-1.2, -0.6),
                l, w, h, rng.uniform(-np.pi, np.pi),
            )
            world = local.copy()
            c, s = np.cos(box.theta), np.sin(box.theta)
            world[:, 0] = c * local[:, 0] - s * local[:, 1] + box.cx
            world[:, 1] = s * local[:, 0] + c * local[:, 1] + box.cy
            world[:, 2] += box.cz
            objs.append(LabeledObject(world, cls, box))
        frames.append(Frame(f"synth_{i:04d}", np.empty((0, 4)), objs))
    return database.build_database(frames, k=k)


def cmd_bench(args):
    config = _load_config(args.config)
    if args.seed is not None:
        config.master_seed = args.seed
    rng = np.random.default_rng(config.master_seed)
    db = database.load_database(args.db) if args.db else synthetic_database(rng)
    latencies = []
    stage_totals = {}
    # one untimed warmup to pay one-time allocation costs
    pipeline.augment_frame(synthetic_frame(rng, "warmup"), db, config, 0)
    for i in range(args.frames):
        frame = synthetic_frame(rng, f"bench_{i:04d}")
        seed = pipeline.frame_seed(config.master_seed, frame.frame_id)
        t0 = time.perf_counter()
        _, stats = pipeline.augment_frame(frame, db, config, seed)
        latencies.append((time.perf_counter() - t0) * 1e3)
        for stage, dt in stats.durations.items():
            stage_totals[stage] = stage_totals.get(stage, 0.0) + dt * 1e3
    stage_means = {k: v / args.frames for k, v in stage_totals.items()}
    result = report.write_bench_report(latencies, stage_means, args.out)
    print(f"frames: {args.frames}")
    print(f"mean latency: {result['mean_ms']:.2f} ms")
    print(f"p95 latency: {result['p95_ms']:.2f} ms")
    for stage, ms in stage_means.items():
        print(f"  {stage}: {ms:.2f} ms")
    print(f"report written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# export-ply
# ---------------------------------------------------------------------------


def cmd_export_ply(args):
    config = _load_config(args.config)
    if args.seed is not None:
        config.master_seed = args.seed
    db = database.load_database(args.db) if args.db else None
    if config.mode in ("cda", "drcpo") and db is None:
        print("error: --db is required for cda/drcpo modes", file=sys.stderr)
        return 2
    frame = kitti_io.load_frame(args.cloud, args.labels)
    seed = pipeline.frame_seed(config.master_seed, frame.frame_id)
    _, _, stages = pipeline.augment_frame_stages(frame, db, config, seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, stage in enumerate(pipeline.STAGES):
        if stage not in stages:
            continue
        snap = stages[stage]
        if stage == "constructed":
            # constructed objects are canonical; lay them out on a line
            spacing = 2.0 + max((o.box.l for o in snap), default=0.0)
            shifted = []
            for j, obj in enumerate(snap):
                pts = obj.points.copy()
                pts[:, 1] += j * spacing
                box = BoundingBox(0.0, j * spacing, 0.0, obj.box.l, obj.box.w, obj.box.h, 0.0)
                shifted.append(LabeledObject(pts, obj.label, box))
            snap = Frame(frame.frame_id, np.empty((0, 4)), shifted)
        path = out_dir / f"stage_{i}_{stage}.ply"
        kitti_io.export_ply(snap, path, color_mode=args.color_mode)
        written.append(path)
    for path in written:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="drcpo",
        description="Deterministic LiDAR augmentation: whole-body construction, "
        "random placement, and hidden-point-removal occlusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-db", help="extract objects from frames into a database file")
    p.add_argument("--data-dir", required=True, help="directory of frame .bin/.txt pairs")
    p.add_argument("--out", required=True, help="output database path")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--label-format", choices=("native", "kitti"), default="native")
    p.set_defaults(func=cmd_build_db)

    p = sub.add_parser("augment", help="augment frames and write .bin/.txt plus a manifest")
    p.add_argument("--db", help="database file (required for cda/drcpo modes)")
    p.add_argument("--frames", required=True, help="directory of input frame pairs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--workers", type=int, help="parallel workers (overrides config)")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("stats", help="per-class and point-count averages over a frame directory")
    p.add_argument("--frames", required=True)
    p.add_argument("--out", required=True, help="report directory (csv + figures)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="augmentation latency over synthetic frames")
    p.add_argument("--db", help="database file (default: synthetic database)")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--frames", type=int, default=100, help="number of synthetic frames")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="report directory (csv + figures)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export-ply", help="write colored PLY snapshots of each pipeline stage")
    p.add_argument("--db", help="database file")
    p.add_argument("--cloud", required=True, help="input velodyne .bin")
    p.add_argument("--labels", required=True, help="input native label file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--color-mode", choices=("class", "intensity"), default="class")
    p.set_defaults(func=cmd_export_ply)
    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DrcpoError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
