"""Pipeline configuration: a flat key=value text format with dotted keys.

Every knob has a default; a config file only lists overrides. ``#`` starts
a comment. Values are scalars or comma-separated tuples. The exact same
flat mapping is echoed into augmentation manifests so any run can be
reproduced from its own output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baseline import DEFAULT_GTS_COUNTS, GdaParams
from .construction import ConstructionConfig
from .database import DEFAULT_GRIDS
from .geometry import CLASSES
from .hpr import DEFAULT_RADIUS_SCALE, EHprParams
from .placement import PlacementConfig

MODES = ("none", "cda", "drcpo")


@dataclass
class PipelineConfig:
    mode: str = "drcpo"
    master_seed: int = 0
    workers: int = 1
    k: int = 400
    grids: dict = field(default_factory=lambda: dict(DEFAULT_GRIDS))
    construction: ConstructionConfig = field(default_factory=ConstructionConfig)
    placement: PlacementConfig = field(default_factory=PlacementConfig)
    shpr_radius_scale: dict = field(
        default_factory=lambda: {cls: DEFAULT_RADIUS_SCALE for cls in CLASSES}
    )
    ehpr: EHprParams = field(default_factory=EHprParams)
    gda_enabled: bool = False
    gda: GdaParams = field(default_factory=GdaParams)
    cda_counts: dict = field(default_factory=lambda: dict(DEFAULT_GTS_COUNTS))

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    # -- flat mapping ------------------------------------------------------

    def to_flat(self):
        flat = {
            "mode": self.mode,
            "seed": str(self.master_seed),
            "workers": str(self.workers),
            "database.k": str(self.k),
            "construction.whole_body_threshold": _fmt(self.construction.whole_body_threshold),
            "construction.max_iterations": str(self.construction.max_iterations),
            "construction.dedup_epsilon": _fmt(self.construction.dedup_epsilon),
            "placement.x_range": _fmt_tuple(self.placement.x_range),
            "placement.y_range": _fmt_tuple(self.placement.y_range),
            "placement.rotation_range": _fmt_tuple(self.placement.rotation_range),
            "placement.max_attempts": str(self.placement.max_attempts),
            "ehpr.radius": _fmt(self.ehpr.radius),
            "ehpr.viewpoint_z": _fmt(self.ehpr.viewpoint_z),
            "ehpr.min_points_per_label": str(self.ehpr.min_points_per_label),
            "gda.enabled": "true" if self.gda_enabled else "false",
            "gda.flip_prob": _fmt(self.gda.flip_prob),
            "gda.scale_range": _fmt_tuple(self.gda.scale_range),
            "gda.rotation_range": _fmt_tuple(self.gda.rotation_range),
        }
        for cls in CLASSES:
            key = cls.lower()
            flat[f"database.grid.{key}"] = _fmt_tuple(self.grids[cls], fmt="{:d}")
            flat[f"placement.objects.{key}"] = str(self.placement.objects_per_class[cls])
            flat[f"shpr.radius_scale.{key}"] = _fmt(self.shpr_radius_scale[cls])
            flat[f"cda.counts.{key}"] = str(self.cda_counts[cls])
        return flat

    @classmethod
    def from_flat(cls, flat):
        known = set(cls().to_flat())
        unknown = set(flat) - known
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        get = flat.get
        grids = {}
        objects = {}
        scales = {}
        counts = {}
        for c in CLASSES:
            key = c.lower()
            grids[c] = tuple(int(v) for v in _split(get(f"database.grid.{key}", _fmt_tuple(DEFAULT_GRIDS[c], fmt="{:d}"))))
            objects[c] = int(get(f"placement.objects.{key}", "10"))
            scales[c] = float(get(f"shpr.radius_scale.{key}", _fmt(DEFAULT_RADIUS_SCALE)))
            counts[c] = int(get(f"cda.counts.{key}", str(DEFAULT_GTS_COUNTS[c])))
        return cls(
            mode=get("mode", "drcpo"),
            master_seed=int(get("seed", "0")),
            workers=int(get("workers", "1")),
            k=int(get("database.k", "400")),
            grids=grids,
            construction=ConstructionConfig(
                whole_body_threshold=float(get("construction.whole_body_threshold", "0.85")),
                max_iterations=int(get("construction.max_iterations", "20")),
                dedup_epsilon=float(get("construction.dedup_epsilon", "0.01")),
            ),
            placement=PlacementConfig(
                x_range=_pair(get("placement.x_range", "0,70.4")),
                y_range=_pair(get("placement.y_range", "-40,40")),
                rotation_range=_pair(get("placement.rotation_range", _fmt_tuple((-np.pi, np.pi)))),
                objects_per_class=objects,
                max_attempts=int(get("placement.max_attempts", "30")),
            ),
            shpr_radius_scale=scales,
            ehpr=EHprParams(
                radius=float(get("ehpr.radius", "100000")),
                viewpoint_z=float(get("ehpr.viewpoint_z", "0")),
                min_points_per_label=int(get("ehpr.min_points_per_label", "5")),
            ),
            gda_enabled=get("gda.enabled", "false").lower() in ("true", "1", "yes"),
            gda=GdaParams(
                flip_prob=float(get("gda.flip_prob", "0.5")),
                scale_range=_pair(get("gda.scale_range", "0.95,1.05")),
                rotation_range=_pair(get("gda.rotation_range", _fmt_tuple((-np.pi / 4, np.pi / 4)))),
            ),
            cda_counts=counts,
        )

    # -- text format -------------------------------------------------------

    def to_text(self):
        flat = self.to_flat()
        return "\n".join(f"{k} = {flat[k]}" for k in sorted(flat)) + "\n"

    @classmethod
    def from_text(cls, text):
        flat = {}
        for line_no, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"config line {line_no}: expected key = value")
            key, value = stripped.split("=", 1)
            flat[key.strip()] = value.strip()
        return cls.from_flat(flat)

    @classmethod
    def from_file(cls, path):
        return cls.from_text(Path(path).read_text())


def _fmt(value):
    return format(float(value), ".17g")


def _fmt_tuple(values, fmt=None):
    if fmt:
        return ",".join(fmt.format(v) for v in values)
    return ",".join(_fmt(v) for v in values)


def _split(text):
    return [v.strip() for v in str(text).split(",")]


def _pair(text):
    parts = _split(text)
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated values, got {text!r}")
    return (float(parts[0]), float(parts[1]))
