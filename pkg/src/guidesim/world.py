"""Synthetic scenes, sensor sampling, and the behavioral pilot model.

Everything here is a pure function of its inputs plus an explicit seed, so a
scenario replays bit-for-bit. The world is 2D top-down; obstacle primitives
are discs (scooters, chairs, bins) and thin capsule segments (poles, bars).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .belt import BeltCue, CueKind, unit_center_diff
from .errors import SceneGenerationError
from .geometry import Pose2D, RectBoundary, unit_vector, wrap_angle
from .mapping import OccupancyGrid, course_costmap
from . import planning


class TaskKind(Enum):
    SIDEWALK = "sidewalk"
    FOOTPATH = "footpath"
    FOREST = "forest"
    DOORBELL = "doorbell"
    SEATS = "seats"
    GROCERY = "grocery"
    COLOURS = "colours"
    FINDER = "finder"
    TOUCHSCREEN = "touchscreen"


NAVIGATION_TASKS = (TaskKind.SIDEWALK, TaskKind.FOOTPATH, TaskKind.FOREST)


@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class Segment:
    p0: tuple[float, float]
    p1: tuple[float, float]
    radius: float = 0.02


Obstacle = Disc | Segment


@dataclass(frozen=True)
class Scene:
    task_kind: TaskKind
    boundary_dims: tuple[float, float]          # (length, width) metres
    boundary_pose: tuple[float, float, float]   # front-edge midpoint x, y, travel heading
    obstacles: tuple[Obstacle, ...]
    payload: dict
    seed: int

    @property
    def boundary(self) -> RectBoundary:
        x, y, heading = self.boundary_pose
        return RectBoundary.from_pose((x, y), heading, self.boundary_dims)

    def start_pose(self, inset: float = 0.3) -> Pose2D:
        x, y, heading = self.boundary_pose
        u = unit_vector(heading)
        return Pose2D(x + inset * u[0], y + inset * u[1], heading)


# Default boundary dimensions and obstacle counts per task.
_NAV_DEFAULTS = {
    TaskKind.SIDEWALK: {"dims": (8.0, 3.0), "obstacle_count": 5, "kind": "disc"},
    TaskKind.FOOTPATH: {"dims": (8.0, 1.5), "obstacle_count": 0, "kind": "disc"},
    TaskKind.FOREST: {"dims": (8.0, 3.0), "obstacle_count": 10, "kind": "pole"},
}
_TASK_DIMS = {
    TaskKind.DOORBELL: (2.0, 2.0),
    TaskKind.SEATS: (4.0, 3.0),
    TaskKind.GROCERY: (2.0, 2.0),
    TaskKind.COLOURS: (2.0, 2.0),
    TaskKind.FINDER: (5.0, 4.0),
    TaskKind.TOUCHSCREEN: (2.0, 2.0),
}

PILOT_RADIUS = 0.25
MAX_PLACEMENT_ATTEMPTS = 1000


def _task_rng(task_kind: TaskKind, seed: int) -> np.random.Generator:
    task_index = list(TaskKind).index(task_kind)
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**63 - 1), task_index]))


def _place_obstacles(rng, rect: RectBoundary, count, kind, pilot_radius,
                     start_xy, goal_xy, budget):
    """Rejection-sample non-overlapping disc obstacles inside the boundary."""
    length, width = rect.dims
    placed: list[Disc] = []
    attempts = 0
    while len(placed) < count:
        if attempts >= budget:
            raise SceneGenerationError(
                f"could not place {count} obstacles after {attempts} attempts")
        attempts += 1
        radius = 0.02 if kind == "pole" else float(rng.uniform(0.15, 0.30))
        a = rng.uniform(1.0, length - 1.0)
        b = rng.uniform(-width / 2 + radius + 0.05, width / 2 - radius - 0.05)
        center = rect.front_center + a * rect.travel_dir + b * rect.left_dir
        # Keep the start and goal neighbourhoods free.
        if np.linalg.norm(center - start_xy) < radius + pilot_radius + 0.8:
            continue
        if np.linalg.norm(center - goal_xy) < radius + pilot_radius + 0.8:
            continue
        if any(np.linalg.norm(center - np.asarray(o.center)) - radius - o.radius < 0.1
               for o in placed):
            continue
        placed.append(Disc((float(center[0]), float(center[1])), radius))
    return placed, attempts


def generate_scene(task_kind: TaskKind, seed: int, params: dict | None = None) -> Scene:
    """Build a reproducible scene for the given task.

    ``params`` may override the documented defaults (obstacle_count,
    min_clearance, boundary_length, boundary_width, and the task-specific
    payload knobs). Navigation scenes are re-sampled until the inflated
    costmap admits a start-to-goal plan; a placement budget of 1000 attempts
    guards against infeasible parameter sets.
    """
    params = dict(params or {})
    rng = _task_rng(task_kind, seed)
    pose = (float(rng.uniform(-5.0, 5.0)), float(rng.uniform(-5.0, 5.0)),
            float(rng.uniform(-math.pi, math.pi)))

    if task_kind in NAVIGATION_TASKS:
        defaults = _NAV_DEFAULTS[task_kind]
        dims = (float(params.get("boundary_length", defaults["dims"][0])),
                float(params.get("boundary_width", defaults["dims"][1])))
        count = int(params.get("obstacle_count", defaults["obstacle_count"]))
        min_clearance = float(params.get("min_clearance", 2 * PILOT_RADIUS))
        pilot_radius = float(params.get("pilot_radius", PILOT_RADIUS))
        if count < 0 or count > 40:
            raise ValueError("obstacle_count out of range [0, 40]")
        if min_clearance <= 0:
            raise ValueError("min_clearance must be positive")
        rect = RectBoundary.from_pose(pose[:2], pose[2], dims)
        start_xy = rect.front_center + 0.3 * rect.travel_dir
        goal_xy = planning.compute_goal(rect)
        budget = MAX_PLACEMENT_ATTEMPTS
        while True:
            obstacles, used = _place_obstacles(
                rng, rect, count, defaults["kind"], pilot_radius,
                start_xy, goal_xy, budget)
            budget -= used
            scene = Scene(task_kind, dims, pose, tuple(obstacles), {}, int(seed))
            # Feasibility gate: a plan must survive inflation that reserves a
            # corridor of min_clearance between the inflated obstacles.
            if _has_feasible_path(scene, pilot_radius + min_clearance / 2):
                return scene
            if budget <= 0:
                raise SceneGenerationError(
                    "no feasible layout within the placement budget")

    dims = _TASK_DIMS[task_kind]
    payload = _build_payload(task_kind, rng, params)
    return Scene(task_kind, dims, pose, (), payload, int(seed))


def _has_feasible_path(scene: Scene, inflation_radius: float) -> bool:
    from .errors import PlanningError
    grid = rasterize_scene(scene, resolution=0.05)
    costmap = course_costmap(grid, scene.boundary, inflation_radius, decay_width=0.0)
    try:
        planning.plan(costmap, scene.start_pose().xy, planning.compute_goal(scene.boundary))
    except PlanningError:
        return False
    return True


def _build_payload(task_kind: TaskKind, rng, params: dict) -> dict:
    from . import taskdata

    if task_kind is TaskKind.DOORBELL:
        n_rows = int(params.get("n_rows", 3))
        n_cols = int(params.get("n_cols", 2))
        names = list(rng.choice(taskdata.NAMES, size=n_rows * n_cols, replace=False))
        target_idx = int(rng.integers(0, len(names)))
        return {
            "n_rows": n_rows, "n_cols": n_cols,
            "names": [str(n) for n in names],
            "target_name": str(names[target_idx]),
            "target_cell": [target_idx // n_cols + 1, target_idx % n_cols + 1],
        }
    if task_kind is TaskKind.SEATS:
        if "occupied_count" in params:
            k = int(params["occupied_count"])
        else:
            k = int(rng.integers(0, 5))
        cells = [[r, c] for r in (1, 2) for c in (1, 2, 3)]
        chosen = rng.choice(len(cells), size=k, replace=False)
        return {"occupied": sorted(cells[int(i)] for i in chosen)}
    if task_kind is TaskKind.GROCERY:
        products = list(taskdata.TEA_PRODUCTS)
        order = rng.permutation(len(products))
        grid = [[products[int(order[r * 5 + c])] for c in range(5)] for r in range(4)]
        tr, tc = int(rng.integers(0, 4)), int(rng.integers(0, 5))
        return {"grid": grid, "target": grid[tr][tc], "target_cell": [tr + 1, tc + 1]}
    if task_kind is TaskKind.COLOURS:
        combo = taskdata.COLOUR_COMBOS[int(rng.integers(0, len(taskdata.COLOUR_COMBOS)))]
        order = [[c, lvl] for c in combo for lvl in (1, 2, 3)]
        arrival = [order[int(i)] for i in rng.permutation(6)]
        palette = {c: {str(lvl): list(taskdata.PALETTE[c][lvl]) for lvl in (1, 2, 3)}
                   for c in combo}
        return {"colours": list(combo), "palette": palette,
                "order": order, "arrival": arrival}
    if task_kind is TaskKind.FINDER:
        count = int(params.get("object_count", 5))
        labels = [str(l) for l in rng.choice(taskdata.FINDER_LABELS, size=count, replace=False)]
        xs = rng.uniform(0.05, 0.95, size=count)
        target = labels[int(rng.integers(0, count))]
        target_x = float(xs[labels.index(target)])
        target_dir = float((0.5 - target_x) * math.radians(100.0))
        return {"objects": [[str(l), float(x)] for l, x in zip(labels, xs)],
                "target": target, "target_dir": target_dir}
    if task_kind is TaskKind.TOUCHSCREEN:
        return {"grid": 5,
                "target_cell": [int(rng.integers(1, 6)), int(rng.integers(1, 6))]}
    raise ValueError(f"unhandled task kind {task_kind}")


def rasterize_scene(scene: Scene, resolution: float = 0.05, margin: float = 1.6) -> OccupancyGrid:
    """Ground-truth occupancy grid of the scene's obstacles.

    The grid covers the boundary's axis-aligned bounds plus ``margin`` so the
    goal point (1 m past the back edge) stays in bounds. A cell is occupied
    when its center lies within an obstacle, or when it contains an obstacle
    center (so poles thinner than a cell still register).
    """
    rect = scene.boundary
    xmin, ymin = rect.corners.min(axis=0) - margin
    xmax, ymax = rect.corners.max(axis=0) + margin
    grid = OccupancyGrid.from_bounds(xmin, ymin, xmax, ymax, resolution)
    centers = grid.cell_centers().reshape(-1, 2)
    occ = np.zeros(len(centers), dtype=bool)
    for obs in scene.obstacles:
        if isinstance(obs, Disc):
            occ |= np.linalg.norm(centers - np.asarray(obs.center), axis=1) <= obs.radius
            anchor_points = [obs.center]
        else:
            occ |= _segment_distance(centers, obs.p0, obs.p1) <= obs.radius
            anchor_points = [obs.p0, obs.p1]
        ij = grid.world_to_cell(anchor_points)
        ok = grid.in_bounds(ij)
        for (ix, iy) in ij[ok]:
            occ[iy * grid.width + ix] = True
    grid.cells = np.where(occ.reshape(grid.height, grid.width), 255, 0).astype(np.uint8)
    return grid


def _segment_distance(points, p0, p1) -> np.ndarray:
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    denom = float(d @ d)
    if denom < 1e-18:
        return np.linalg.norm(points - p0, axis=1)
    t = np.clip((points - p0) @ d / denom, 0.0, 1.0)
    closest = p0 + t[:, None] * d
    return np.linalg.norm(points - closest, axis=1)


def _ray_disc(origin, dirs, center, radius):
    """Smallest positive ray parameter hitting the disc, inf when missed."""
    oc = origin - np.asarray(center, dtype=float)
    b = dirs @ oc
    c0 = float(oc @ oc) - radius * radius
    disc = b * b - c0
    t = np.full(len(dirs), np.inf)
    hit = disc >= 0
    sq = np.sqrt(np.maximum(disc, 0.0))
    t1 = -b - sq
    t2 = -b + sq
    first = np.where(t1 > 1e-9, t1, np.where(t2 > 1e-9, t2, np.inf))
    t[hit] = first[hit]
    return t


def _ray_capsule(origin, dirs, p0, p1, radius):
    """Ray parameter to a capsule: end discs plus the two offset side walls."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    t = np.minimum(_ray_disc(origin, dirs, p0, radius),
                   _ray_disc(origin, dirs, p1, radius))
    axis = p1 - p0
    seg_len = float(np.hypot(axis[0], axis[1]))
    if seg_len < 1e-12:
        return t
    axis = axis / seg_len
    normal = np.array([-axis[1], axis[0]])
    for side in (1.0, -1.0):
        a0 = p0 + side * radius * normal
        # Solve origin + t*d = a0 + s*axis for each ray direction.
        denom = dirs[:, 0] * (-axis[1]) - dirs[:, 1] * (-axis[0])
        rel = a0 - origin
        with np.errstate(divide="ignore", invalid="ignore"):
            tt = (rel[0] * (-axis[1]) - rel[1] * (-axis[0])) / denom
            ss = (dirs[:, 0] * rel[1] - dirs[:, 1] * rel[0]) / (-denom)
        valid = (np.abs(denom) > 1e-12) & (tt > 1e-9) & (ss >= 0.0) & (ss <= seg_len)
        t = np.where(valid & (tt < t), tt, t)
    return t


def sample_depth_points(scene: Scene, pose: Pose2D, fov: float, max_range: float,
                        noise_sigma: float, seed: int, n_rays: int = 360) -> np.ndarray:
    """Obstacle surface points visible from the pose, with Gaussian noise.

    Casts ``n_rays`` rays spread evenly across the field of view and keeps the
    nearest obstacle hit of each, so occlusion between obstacles is respected.
    Returns an (n, 2) array; empty when nothing is visible.
    """
    if not 0 < fov <= 2 * math.pi + 1e-12:
        raise ValueError("fov must be in (0, 2*pi]")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    angles = pose.heading - fov / 2 + (np.arange(n_rays) + 0.5) * (fov / n_rays)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    origin = pose.xy
    t = np.full(n_rays, np.inf)
    for obs in scene.obstacles:
        if isinstance(obs, Disc):
            t = np.minimum(t, _ray_disc(origin, dirs, obs.center, obs.radius))
        else:
            t = np.minimum(t, _ray_capsule(origin, dirs, obs.p0, obs.p1, obs.radius))
    hit = t <= max_range
    points = origin + t[hit, None] * dirs[hit]
    if noise_sigma > 0 and len(points):
        rng = np.random.default_rng(seed)
        points = points + rng.normal(0.0, noise_sigma, size=points.shape)
    return points


EDGE_SET = frozenset({"front", "back", "left", "right"})


def sample_edge_points(scene: Scene, visible_edges, noise_sigma: float,
                       outlier_fraction: float, seed: int, n_points: int = 400,
                       pose: Pose2D | None = None, fov: float | None = None,
                       max_range: float | None = None) -> np.ndarray:
    """Ground-plane samples of the boundary outline for the rectangle fitter.

    Inliers land on the requested edges (chosen proportionally to edge
    length) plus isotropic Gaussian noise; each point independently turns
    into an outlier with probability ``outlier_fraction``, drawn uniformly
    inside the rectangle. When a pose plus frustum is given, inlier samples
    outside the view are dropped, so fewer than ``n_points`` may return.
    """
    edges = sorted(set(visible_edges))
    if not edges or not set(edges) <= EDGE_SET:
        raise ValueError(f"visible_edges must be a non-empty subset of {sorted(EDGE_SET)}")
    if not 0 <= outlier_fraction < 0.5:
        raise ValueError("outlier_fraction must be in [0, 0.5)")
    rect = scene.boundary
    rng = np.random.default_rng(seed)
    seg = {name: rect.edge(name) for name in edges}
    lengths = np.array([np.linalg.norm(b - a) for a, b in seg.values()])
    weights = lengths / lengths.sum()
    length, width = rect.dims

    points = []
    for _ in range(n_points):
        if rng.random() < outlier_fraction:
            a = rng.uniform(0.0, length)
            b = rng.uniform(-width / 2, width / 2)
            points.append(rect.front_center + a * rect.travel_dir + b * rect.left_dir)
            continue
        k = int(rng.choice(len(edges), p=weights))
        p0, p1 = seg[edges[k]]
        base = p0 + rng.uniform(0.0, 1.0) * (p1 - p0)
        if pose is not None and fov is not None and max_range is not None:
            delta = base - pose.xy
            dist = float(np.hypot(delta[0], delta[1]))
            bearing = math.atan2(delta[1], delta[0])
            if dist > max_range or abs(wrap_angle(bearing - pose.heading)) > fov / 2:
                continue
        points.append(base + rng.normal(0.0, noise_sigma, size=2))
    return np.array(points) if points else np.zeros((0, 2))


@dataclass(frozen=True)
class BehaviorParams:
    """Knobs of the simulated pilot. Defaults give a smooth closed loop."""

    speed: float = 0.7              # m/s walking speed when aligned
    turn_rate: float = 1.8          # rad/s bound on rotation
    reaction_delay: float = 0.3     # s before a new cue takes effect
    turn_speed_factor: float = 0.25  # walking speed multiplier while turning
    heading_jitter: float = 0.0     # rad / sqrt(s) random heading wobble
    seed: int = 0


@dataclass(frozen=True)
class PilotState:
    """Pose plus bookkeeping of the simulated pilot.

    ``heading`` stays wrapped to (-pi, pi]; ``distance_traveled`` never
    decreases. Cue fields model the reaction: an emitted cue becomes the
    acted-on instruction after ``reaction_delay``; a turn cue instructs one
    rotation by its heading offset (tracked in ``remaining_turn``), after
    which the pilot walks on straight until the next cue.
    """

    pose: Pose2D
    forward_speed: float = 0.0
    distance_traveled: float = 0.0
    time: float = 0.0
    step_count: int = 0
    active_cue: BeltCue | None = None
    remaining_turn: float = 0.0
    pending_cue: BeltCue | None = None
    pending_since: float = 0.0


def step_pilot(state: PilotState, cue: BeltCue | None, dt: float,
               behavior: BehaviorParams | None = None) -> PilotState:
    """Advance the pilot by ``dt`` seconds.

    ``cue`` is a newly emitted belt cue, or None when nothing new was emitted
    this step (the pilot keeps executing the previous instruction). A
    center-back cue (unit 8) means walk straight; any other unit instructs a
    rotation by that unit's heading offset, executed at the bounded turn rate
    while walking slowly, then the pilot resumes walking straight. NONE
    stands still; ALL stops (task complete).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    behavior = behavior or BehaviorParams()
    pending, since = state.pending_cue, state.pending_since
    active, remaining = state.active_cue, state.remaining_turn
    if cue is not None:
        pending, since = cue, state.time
    if pending is not None and state.time - since >= behavior.reaction_delay - 1e-12:
        active = pending
        remaining = unit_center_diff(active.index) if active.kind is CueKind.UNIT else 0.0
        pending = None

    heading = state.pose.heading
    speed = 0.0
    if active is not None and active.kind is CueKind.UNIT:
        if abs(remaining) > 1e-9:
            turn = float(np.clip(remaining, -behavior.turn_rate * dt, behavior.turn_rate * dt))
            heading = wrap_angle(heading + turn)
            remaining -= turn
            speed = behavior.speed * behavior.turn_speed_factor
        else:
            speed = behavior.speed
    if behavior.heading_jitter > 0:
        jrng = np.random.default_rng(
            np.random.SeedSequence([behavior.seed, state.step_count]))
        heading = wrap_angle(heading + jrng.normal(0.0, behavior.heading_jitter * math.sqrt(dt)))

    advance = speed * dt
    pose = Pose2D(state.pose.x + advance * math.cos(heading),
                  state.pose.y + advance * math.sin(heading),
                  float(heading))
    return replace(
        state,
        pose=pose,
        forward_speed=speed,
        distance_traveled=state.distance_traveled + advance,
        time=state.time + dt,
        step_count=state.step_count + 1,
        active_cue=active,
        remaining_turn=remaining,
        pending_cue=pending,
        pending_since=since,
    )
