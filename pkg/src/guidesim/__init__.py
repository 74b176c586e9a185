"""guidesim: deterministic simulator and classical algorithm library for
belt-guided assistive navigation and scene-understanding tasks."""

from .belt import (BeltCue, BeltGuidance, CueKind, FinishDetector, FinishParams,
                   FrustumParams, GuidanceParams, heading_to_unit, unit_center_diff)
from .boundary import Plane, RansacParams, detect_boundary, fit_ground_plane
from .colours import (Instruction, ShirtClass, classify_shirt, insertion_plan,
                      segment_dominant_region)
from .geometry import Pose2D, RectBoundary, wrap_angle
from .harness import (AggregateTable, ScenarioDoc, aggregate, build_scene, execute,
                      format_table, load_scenario, records_from_csv, records_to_csv,
                      round_half_up, scene_to_scenario, validate_scenario)
from .mapping import (OccupancyGrid, crop_to_boundary, grid_from_text, grid_to_text,
                      inflate, integrate_points)
from .pipelines import RunConfig, RunRecord, run_scenario
from .planning import Path, PlannerParams, compute_goal, desired_heading, plan
from .seats import SeatParams, SeatReport, analyze_seats, statistical_outlier_filter
from .structuring import (Cluster, GridCell, TextDetection, assign_rows_cols,
                          cluster_detections, dbscan_1d, finder_proximity,
                          finder_side, grocery_grid, levenshtein, match_keywords,
                          match_name, rectify_centers)
from .touch import (TouchCue, TouchGuidance, apply_homography, fingertip,
                    homography_from_corners)
from .world import (BehaviorParams, Disc, PilotState, Scene, Segment, TaskKind,
                    generate_scene, rasterize_scene, sample_depth_points,
                    sample_edge_points, step_pilot)

__version__ = "0.1.0"
