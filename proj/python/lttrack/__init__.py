"""Long-term multi-face tracking with rank-based tracklet reconnection."""

from ._lttrack import (
    CandidatePolicy,
    Config,
    FbtrMode,
    PredictorKind,
    QualityBounds,
    check_rank_margin,
    cosine_profile,
    epsilon_star,
    evaluate,
    hungarian,
    iou,
    make_ghosts,
    read_detections,
    run_study,
    scene_names,
    similarity,
    simulate,
    track,
    write_detections,
)

__all__ = [
    "CandidatePolicy",
    "Config",
    "FbtrMode",
    "PredictorKind",
    "QualityBounds",
    "check_rank_margin",
    "cosine_profile",
    "epsilon_star",
    "evaluate",
    "hungarian",
    "iou",
    "make_ghosts",
    "read_detections",
    "run_study",
    "scene_names",
    "similarity",
    "simulate",
    "track",
    "write_detections",
]
