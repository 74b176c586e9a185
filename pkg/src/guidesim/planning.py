"""Grid path planning: goal placement, A* search, heading extraction.

Step cost multiplies metric step length by (1 + cell_cost / 255 * cost_gain)
of the cell being entered, so inflated cells are crossable but expensive and
plans keep clearance. With heuristic_weight 1 the Euclidean heuristic is
admissible (the multiplier never drops below 1) and the result is optimal.
"""
from __future__ import annotations

import heapq
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LethalGoal, LethalStart, NoPath, OutOfBounds
from .geometry import RectBoundary, wrap_angle
from .mapping import OccupancyGrid

GOAL_OFFSET = 1.0  # metres beyond the back-edge midpoint

_NEIGHBORS = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
_STEP_LEN = [math.hypot(dx, dy) for dx, dy in _NEIGHBORS]


@dataclass
class PlannerParams:
    lethal_threshold: int = 254
    heuristic_weight: float = 1.0
    cost_gain: float = 10.0


@dataclass(frozen=True)
class Path:
    """8-connected cell path as world waypoints (cell centers) plus total cost."""

    waypoints: np.ndarray  # (n, 2)
    cost: float
    cells: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))

    def __len__(self) -> int:
        return len(self.waypoints)


def compute_goal(rect: RectBoundary) -> np.ndarray:
    """Goal point: back-edge midpoint displaced 1 m along the outward normal."""
    return rect.back_center + GOAL_OFFSET * rect.travel_dir


def plan(costmap: OccupancyGrid, start, goal, params: PlannerParams | None = None) -> Path:
    params = params or PlannerParams()
    lethal = params.lethal_threshold
    (sx, sy), = costmap.world_to_cell([np.asarray(start, dtype=float)])
    (gx, gy), = costmap.world_to_cell([np.asarray(goal, dtype=float)])
    w, h = costmap.width, costmap.height
    if not (0 <= sx < w and 0 <= sy < h):
        raise OutOfBounds(f"start cell ({sx}, {sy}) outside {w}x{h} grid")
    if not (0 <= gx < w and 0 <= gy < h):
        raise OutOfBounds(f"goal cell ({gx}, {gy}) outside {w}x{h} grid")
    cells = costmap.cells
    if cells[sy, sx] >= lethal:
        raise LethalStart(f"start cell ({sx}, {sy}) has cost {cells[sy, sx]}")
    if cells[gy, gx] >= lethal:
        raise LethalGoal(f"goal cell ({gx}, {gy}) has cost {cells[gy, gx]}")

    res = costmap.resolution
    weight = params.heuristic_weight
    start_idx = sy * w + sx
    goal_idx = gy * w + gx
    if start_idx == goal_idx:
        wp = costmap.cell_center(np.array([sx]), np.array([sy]))
        return Path(wp, 0.0, np.array([[sx, sy]], dtype=np.int64))

    factor = 1.0 + cells.astype(np.float64).ravel() / 255.0 * params.cost_gain
    g = np.full(w * h, np.inf)
    parent = np.full(w * h, -1, dtype=np.int64)
    g[start_idx] = 0.0

    def heur(ix, iy):
        return weight * res * math.hypot(ix - gx, iy - gy)

    # Heap entries are (f, h, cell index, g at push); the trailing g is not
    # part of the ordering contract, it only lets stale entries be skipped.
    open_heap = [(heur(sx, sy), heur(sx, sy), start_idx, 0.0)]
    goal_cost = np.inf
    while open_heap:
        f, _, idx, g_pushed = heapq.heappop(open_heap)
        if f > goal_cost:
            break
        if g_pushed > g[idx]:
            continue  # stale entry
        gi = g[idx]
        iy, ix = divmod(idx, w)
        for k, (dx, dy) in enumerate(_NEIGHBORS):
            nx, ny = ix + dx, iy + dy
            if not (0 <= nx < w and 0 <= ny < h):
                continue
            nidx = ny * w + nx
            if cells[ny, nx] >= lethal:
                continue
            ng = gi + res * _STEP_LEN[k] * factor[nidx]
            if ng < g[nidx]:
                g[nidx] = ng
                parent[nidx] = idx
                if nidx == goal_idx:
                    goal_cost = min(goal_cost, ng)
                heapq.heappush(open_heap, (ng + heur(nx, ny), heur(nx, ny), nidx, ng))

    if not np.isfinite(g[goal_idx]):
        raise NoPath(f"goal cell ({gx}, {gy}) unreachable from ({sx}, {sy})")

    chain = [goal_idx]
    while chain[-1] != start_idx:
        chain.append(int(parent[chain[-1]]))
    chain.reverse()
    ij = np.array([(idx % w, idx // w) for idx in chain], dtype=np.int64)
    waypoints = costmap.cell_center(ij[:, 0], ij[:, 1])
    return Path(waypoints, float(g[goal_idx]), ij)


def desired_heading(path: Path, pose, lookahead: float) -> float:
    """Heading toward the first path vertex at least ``lookahead`` metres of
    arc-length past the vertex closest to the pose (clamped to the last one).
    """
    wp = path.waypoints
    if len(wp) == 0:
        raise ValueError("empty path")
    pos = np.asarray([pose.x, pose.y]) if hasattr(pose, "x") else np.asarray(pose, dtype=float)
    d = np.linalg.norm(wp - pos, axis=1)
    nearest = int(np.argmin(d))
    target = wp[-1]
    arc = 0.0
    for k in range(nearest + 1, len(wp)):
        arc += float(np.linalg.norm(wp[k] - wp[k - 1]))
        if arc >= lookahead:
            target = wp[k]
            break
    delta = target - pos
    if np.hypot(delta[0], delta[1]) < 1e-12:
        return float(wrap_angle(pose.heading)) if hasattr(pose, "heading") else 0.0
    return float(math.atan2(delta[1], delta[0]))


def path_to_csv(path: Path) -> str:
    """Waypoints as ``x,y`` rows for plotting and golden files."""
    buf = io.StringIO()
    for x, y in path.waypoints:
        buf.write(f"{x:.6f},{y:.6f}\n")
    return buf.getvalue()
