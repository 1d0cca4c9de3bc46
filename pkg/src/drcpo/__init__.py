"""drcpo: deterministic LiDAR point-cloud augmentation.

Whole-body objects are assembled from real observations in a ground-truth
database, dropped into frames at random poses, and re-occluded with hidden
point removal so the result looks like a genuine scan.
"""

from .baseline import GdaParams, global_augment, gts_sample
from .config import PipelineConfig
from .construction import ConstructionConfig, construct_whole_body, dedup_points, is_whole_body
from .database import (
    DEFAULT_GRIDS,
    GtDatabase,
    PartitionGrid,
    build_database,
    index_candidates,
    load_database,
    partition_counts,
    partition_densities,
    save_database,
)
from .geometry import (
    CLASSES,
    BoundingBox,
    Frame,
    LabeledObject,
    Pose,
    bev_overlap,
    box_diagonal,
    box_similarity,
    from_canonical,
    mirror_x,
    normalize_angle,
    rotate_z,
    to_canonical,
)
from .hpr import EHprParams, convex_hull_vertices, e_hpr, hpr_visible, s_hpr, spherical_flip
from .kitti_io import (
    export_ply,
    load_frame,
    read_kitti_labels,
    read_labels,
    read_velodyne_bin,
    split_frame,
    write_frame,
    write_labels,
    write_velodyne_bin,
)
from .pipeline import FrameStats, augment_frame, augment_frame_stages, frame_seed
from .placement import PlacementConfig, place_all, sample_pose, try_place

__version__ = "0.1.0"
