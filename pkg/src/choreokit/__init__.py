"""choreokit: choreography pattern extraction and beat-synchronized
keyframe dance planning.

The library splits into small focused modules; the names below cover the
common entry points. See the README for file formats and CLI usage.
"""

from .errors import (
    BudgetExceeded,
    ChoreokitError,
    GenerationError,
    GraphBuildError,
    Infeasible,
    InputError,
    SegmentationError,
    SkeletonMismatchError,
)
from .graph import (
    FlowMatrix,
    KeyframeGraph,
    KeyframeSet,
    build_graph,
    mirror_consistent,
    partially_mirrored,
)
from .labeling import (
    Clustering,
    LabelingResult,
    MirrorPairs,
    assign_labels,
    cluster_segments,
    detect_mirrored_clusters,
    dtw_distance,
    label_analysis,
    label_pipeline,
    mirror_segment,
    mirrored_dtw,
    pairwise_dtw,
    partition_by_direction,
)
from .metrics import (
    LabelMetrics,
    adjusted_rand_index,
    mirror_pair_prf,
    normalized_mutual_information,
    pattern_mirror_pairs,
)
from .pattern import ChoreoPattern, PatternToken, parse_pattern, parse_token
from .pose import (
    JointPermutation,
    Pose,
    PoseSequence,
    joint_geodesic_distance,
    mirror_pose,
    pose_distance,
    reflect_direction,
    segment_direction,
)
from .segmentation import BeatGrid, MotionSegment, build_segments
from .solver import (
    Assignment,
    CustomConstraints,
    Violation,
    WalkPath,
    assignment_to_path,
    brute_force_solve,
    check_feasible,
    solve,
)
from .synthetic import (
    EvalReport,
    SyntheticSpec,
    generate_from_tokens,
    generate_synthetic,
    run_eval,
)
from .warp import WarpEntry, WarpSchedule, build_warp, source_time

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
