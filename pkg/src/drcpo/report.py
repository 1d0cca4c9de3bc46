"""Report rendering for the stats and bench commands.

Each report writes a small delimited CSV next to one or two PNG figures so
runs can be compared at a glance without reloading the data.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .geometry import CLASSES  # noqa: E402

CLASS_BAR_COLORS = ["#d62728", "#2ca02c", "#1f77b4"]


def frame_stats_summary(records):
    """Aggregate per-frame records into per-class and point averages."""
    n = max(len(records), 1)
    avg_objects = {
        cls: sum(rec["objects"].get(cls, 0) for rec in records) / n for cls in CLASSES
    }
    avg_points = sum(rec["total_points"] for rec in records) / n
    return {"frames": len(records), "avg_objects": avg_objects, "avg_points": avg_points}


def write_stats_report(records, out_dir):
    """stats.csv plus bar/histogram figures for a set of frame records."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = frame_stats_summary(records)

    with open(out_dir / "stats.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_id", *[f"{c.lower()}_objects" for c in CLASSES], "total_points"])
        for rec in records:
            writer.writerow(
                [rec["frame_id"], *[rec["objects"].get(c, 0) for c in CLASSES], rec["total_points"]]
            )
        writer.writerow(
            ["mean", *[f"{summary['avg_objects'][c]:.3f}" for c in CLASSES], f"{summary['avg_points']:.1f}"]
        )

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].bar(CLASSES, [summary["avg_objects"][c] for c in CLASSES], color=CLASS_BAR_COLORS)
    axes[0].set_ylabel("objects per frame")
    axes[0].set_title("Average object counts")
    axes[1].hist([rec["total_points"] for rec in records], bins=min(30, max(5, len(records))), color="#555555")
    axes[1].set_xlabel("points per frame")
    axes[1].set_ylabel("frames")
    axes[1].set_title("Point count distribution")
    fig.tight_layout()
    fig.savefig(out_dir / "stats.png", dpi=120)
    plt.close(fig)
    return summary


def write_bench_report(latencies_ms, stage_means_ms, out_dir):
    """bench.csv plus a latency histogram with stage breakdown."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lat = sorted(latencies_ms)
    mean = sum(lat) / len(lat)
    p95 = lat[min(len(lat) - 1, int(round(0.95 * (len(lat) - 1))))]

    with open(out_dir / "bench.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value_ms"])
        writer.writerow(["mean", f"{mean:.3f}"])
        writer.writerow(["p95", f"{p95:.3f}"])
        for stage, value in stage_means_ms.items():
            writer.writerow([f"stage_{stage}", f"{value:.3f}"])

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].hist(latencies_ms, bins=min(30, max(5, len(latencies_ms))), color="#1f77b4")
    axes[0].axvline(mean, color="k", linestyle="--", label=f"mean {mean:.1f} ms")
    axes[0].axvline(p95, color="r", linestyle=":", label=f"p95 {p95:.1f} ms")
    axes[0].set_xlabel("per-frame latency (ms)")
    axes[0].set_ylabel("frames")
    axes[0].legend()
    stages = list(stage_means_ms)
    axes[1].bar(stages, [stage_means_ms[s] for s in stages], color="#888888")
    axes[1].set_ylabel("mean time (ms)")
    axes[1].set_title("Stage breakdown")
    axes[1].tick_params(axis="x", rotation=30)
    fig.tight_layout()
    fig.savefig(out_dir / "bench.png", dpi=120)
    plt.close(fig)
    return {"mean_ms": mean, "p95_ms": p95}
