"""Vibration-belt guidance: heading quantization, 1 Hz ticker, finish detection.

Belt convention
---------------
The belt has 16 units. Unit 0 sits at the body front; indices grow clockwise
when the wearer is viewed from above, so unit j sits at body angle
-j * 22.5 degrees (CCW-positive body frame). The cue for a heading difference
``diff = desired - current`` (CCW-positive) is placed at body angle
``wrap(diff + pi)``: walking aligned puts the cue at the center back (unit 8),
and the cue direction stays fixed in the global frame while the wearer
rotates. A desired heading to the wearer's left (diff > 0) lands on units
1..7, which cover the left half of the body under this indexing.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import PlanningError
from .geometry import RectBoundary, wrap_angle
from .mapping import OccupancyGrid
from . import planning

N_UNITS = 16
SECTOR = 2.0 * math.pi / N_UNITS


class CueKind(Enum):
    UNIT = "unit"
    ALL = "all"
    NONE = "none"


@dataclass(frozen=True)
class BeltCue:
    kind: CueKind
    index: int | None = None

    def __post_init__(self):
        if self.kind is CueKind.UNIT:
            if self.index is None or not 0 <= self.index < N_UNITS:
                raise ValueError(f"unit index must be in [0, {N_UNITS - 1}]")
        elif self.index is not None:
            raise ValueError(f"{self.kind} cue carries no index")

    @classmethod
    def unit(cls, index: int) -> "BeltCue":
        return cls(CueKind.UNIT, int(index))

    @classmethod
    def all_units(cls) -> "BeltCue":
        return cls(CueKind.ALL)

    @classmethod
    def none(cls) -> "BeltCue":
        return cls(CueKind.NONE)

    @property
    def body_angle(self) -> float:
        """Body-frame direction of a UNIT cue (CCW-positive, front = 0)."""
        if self.kind is not CueKind.UNIT:
            raise ValueError("only unit cues have a body angle")
        return float(wrap_angle(-self.index * SECTOR))

    def __str__(self) -> str:
        return f"unit{self.index}" if self.kind is CueKind.UNIT else self.kind.value


def unit_center_diff(index: int) -> float:
    """Heading difference at the center of unit ``index``'s preimage sector."""
    return float(wrap_angle((8 - index) * SECTOR))


def heading_to_unit(heading_diff: float) -> BeltCue:
    """Quantize a heading difference onto the 16 belt units.

    Sector boundaries (ties within 1e-12 rad) resolve to the lower index.
    """
    d = wrap_angle(heading_diff)
    best_j, best_err = 0, math.inf
    for j in range(N_UNITS):
        err = abs(wrap_angle(d - unit_center_diff(j)))
        if err < best_err - 1e-12:
            best_j, best_err = j, err
    return BeltCue.unit(best_j)


@dataclass
class FrustumParams:
    """Horizontal camera frustum used for finish-line endpoint visibility."""

    fov: float = math.radians(110.0)
    max_range: float = 6.0

    def visible(self, pose, point) -> bool:
        delta = np.asarray(point, dtype=float) - pose.xy
        dist = float(np.hypot(delta[0], delta[1]))
        if dist > self.max_range:
            return False
        bearing = math.atan2(delta[1], delta[0])
        return abs(wrap_angle(bearing - pose.heading)) <= self.fov / 2


@dataclass
class FinishParams:
    forward_threshold: float = 1.0          # metres past endpoint loss
    min_travel_fraction: float = 0.75       # of boundary length, rejects false positives
    frustum: FrustumParams = field(default_factory=FrustumParams)


class FinishDetector:
    """Latches task completion from back-edge endpoint visibility and travel.

    Armed only once the traveled distance exceeds half the boundary length.
    Completion requires the two back-edge endpoints to leave the camera
    frustum, a further ``forward_threshold`` metres of travel after that,
    and total travel above ``min_travel_fraction`` of the boundary length.
    """

    def __init__(self, params: FinishParams | None = None):
        self.params = params or FinishParams()
        self._lost_at: float | None = None
        self.finished = False

    def update(self, rect: RectBoundary, pose, distance_traveled: float) -> bool:
        if self.finished:
            return True
        length = rect.dims[0]
        if distance_traveled < 0.5 * length:
            return False
        fr = self.params.frustum
        endpoints = rect.edge("back")
        visible = any(fr.visible(pose, p) for p in endpoints)
        if visible:
            self._lost_at = None
            return False
        if self._lost_at is None:
            self._lost_at = distance_traveled
            return False
        if (distance_traveled - self._lost_at >= self.params.forward_threshold
                and distance_traveled >= self.params.min_travel_fraction * length):
            self.finished = True
        return self.finished


@dataclass
class GuidanceParams:
    period: float = 1.0        # seconds between emitted cues
    lookahead: float = 0.9     # metres along the path for the desired heading
    snap_radius: float = 0.3   # metres to hunt for a free start cell
    planner: planning.PlannerParams = field(default_factory=planning.PlannerParams)
    finish: FinishParams = field(default_factory=FinishParams)


class BeltGuidance:
    """Stateful 1 Hz guidance ticker for one scenario run.

    ``tick`` returns the emitted cue, or None when the call falls inside the
    rate-limit window and nothing is emitted. After finish detection it emits
    ALL exactly once, then NONE. Planning failures switch the ticker into a
    halted state (NONE cues) and record a diagnostic.
    """

    def __init__(self, params: GuidanceParams | None = None):
        self.params = params or GuidanceParams()
        self.finish = FinishDetector(self.params.finish)
        self.cue_log: list[tuple[float, BeltCue]] = []
        self.halted = False
        self.diagnostic: str | None = None
        self._last_emit: float | None = None
        self._all_sent = False
        self.last_path: planning.Path | None = None

    @property
    def finished(self) -> bool:
        return self.finish.finished

    def _emit(self, t: float, cue: BeltCue) -> BeltCue:
        self._last_emit = t
        self.cue_log.append((t, cue))
        return cue

    def _free_start(self, costmap: OccupancyGrid, pose) -> np.ndarray:
        """Nearest non-lethal cell center within snap_radius of the pose."""
        lethal = self.params.planner.lethal_threshold
        (ix, iy), = costmap.world_to_cell([pose.xy])
        if (0 <= ix < costmap.width and 0 <= iy < costmap.height
                and costmap.cells[iy, ix] < lethal):
            return pose.xy
        r = max(1, int(math.ceil(self.params.snap_radius / costmap.resolution)))
        best, best_d = None, math.inf
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                nx, ny = ix + dx, iy + dy
                if not (0 <= nx < costmap.width and 0 <= ny < costmap.height):
                    continue
                if costmap.cells[ny, nx] >= lethal:
                    continue
                center = costmap.cell_center(nx, ny)
                d = float(np.linalg.norm(center - pose.xy))
                if d < best_d and d <= self.params.snap_radius:
                    best, best_d = center, d
        return best if best is not None else pose.xy

    def tick(self, costmap: OccupancyGrid, rect: RectBoundary, pose, t: float,
             distance_traveled: float) -> BeltCue | None:
        if self._last_emit is not None and t - self._last_emit < self.params.period - 1e-9:
            return None
        if self.finish.update(rect, pose, distance_traveled):
            if not self._all_sent:
                self._all_sent = True
                return self._emit(t, BeltCue.all_units())
            return self._emit(t, BeltCue.none())
        if self.halted:
            return self._emit(t, BeltCue.none())
        goal = planning.compute_goal(rect)
        try:
            start = self._free_start(costmap, pose)
            path = planning.plan(costmap, start, goal, self.params.planner)
        except PlanningError as exc:
            self.halted = True
            self.diagnostic = f"{type(exc).__name__}: {exc}"
            return self._emit(t, BeltCue.none())
        self.last_path = path
        desired = planning.desired_heading(path, pose, self.params.lookahead)
        diff = wrap_angle(desired - pose.heading)
        return self._emit(t, heading_to_unit(diff))


def cue_log_to_csv(log: list[tuple[float, BeltCue]]) -> str:
    """Cue history as ``t,cue`` rows for replay and plotting."""
    buf = io.StringIO()
    buf.write("t,cue\n")
    for t, cue in log:
        buf.write(f"{t:.3f},{cue}\n")
    return buf.getvalue()
