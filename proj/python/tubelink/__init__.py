"""Action-tube linking over per-frame region proposals."""

from ._tubelink import (
    ActionPath,
    ActionTube,
    Assignment,
    BoundingBox,
    EvalThresholds,
    GroundTruthTube,
    IntegratedScores,
    LinkerConfig,
    MatchReport,
    OverlapProfile,
    PixelMask,
    PlantedTube,
    Region,
    RegionProposal,
    Scenario,
    ScenarioSpec,
    ValidationError,
    VideoProposals,
    best_path,
    box_iou,
    detection_metrics,
    extract_paths,
    extract_tubes,
    f1,
    filter_tubes,
    generate_scenario,
    integrated_scores,
    link_video,
    load_ground_truth,
    load_proposals,
    load_tubes,
    match_tubes,
    metric_curve,
    nms_indices,
    overlap_profile,
    path_energy,
    save_ground_truth,
    save_proposals,
    save_tubes,
    spatiotemporal_iou,
    temporal_label,
    tube_score,
)

__all__ = [name for name in dir() if not name.startswith("_")]
