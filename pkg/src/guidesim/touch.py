"""Touchscreen interaction: homography rectification and finger guidance.

The rectified screen frame has x growing right and y growing down (pixel
convention), so the fingertip is the mask point with the smallest y. The
target coordinate is fixed once at construction and never recomputed.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateCorners, EmptyMask, PointAtInfinity


def _any_three_collinear(pts: np.ndarray, tol: float) -> bool:
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                area = abs((pts[j, 0] - pts[i, 0]) * (pts[k, 1] - pts[i, 1])
                           - (pts[k, 0] - pts[i, 0]) * (pts[j, 1] - pts[i, 1]))
                scale = max(1.0, np.abs(pts[[i, j, k]]).max() ** 2)
                if area < tol * scale:
                    return True
    return False


def homography_from_corners(src, dst) -> np.ndarray:
    """Direct linear transform from 4 source corners to 4 destination corners.

    Returns the 3x3 matrix normalized so the bottom-right element is 1.
    Raises DegenerateCorners when any 3 of the 4 points on either side are
    collinear or the solved matrix is not invertible.
    """
    s = np.asarray(src, dtype=float).reshape(4, 2)
    d = np.asarray(dst, dtype=float).reshape(4, 2)
    if _any_three_collinear(s, 1e-9) or _any_three_collinear(d, 1e-9):
        raise DegenerateCorners("three of the four corners are collinear")
    rows = []
    for (x, y), (u, v) in zip(s, d):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y, -u])
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y, -v])
    a = np.array(rows, dtype=float)
    _, _, vt = np.linalg.svd(a)
    h = vt[-1].reshape(3, 3)
    if abs(h[2, 2]) < 1e-12:
        raise DegenerateCorners("homography has a vanishing normalization element")
    h = h / h[2, 2]
    if abs(np.linalg.det(h)) < 1e-12:
        raise DegenerateCorners("homography is not invertible")
    return h


def apply_homography(h, point) -> np.ndarray:
    """Projective application of a 3x3 homography to a 2D point."""
    p = np.asarray(point, dtype=float)
    v = h @ np.array([p[0], p[1], 1.0])
    if abs(v[2]) < 1e-12:
        raise PointAtInfinity(f"point {point} maps to infinity")
    return v[:2] / v[2]


def fingertip(hand_mask_pixels) -> tuple[float, float]:
    """Highest mask point in the screen frame: minimal y, ties to minimal x."""
    pts = np.asarray(hand_mask_pixels, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyMask("empty hand mask")
    order = np.lexsort((pts[:, 0], pts[:, 1]))
    return float(pts[order[0], 0]), float(pts[order[0], 1])


class Phase(Enum):
    ALIGN_X = "align_x"
    ALIGN_Y = "align_y"
    SELECT = "select"
    DONE = "done"


class Direction(Enum):
    LEFT = "left"
    RIGHT = "right"
    UP = "up"
    DOWN = "down"
    SELECT = "select"


@dataclass(frozen=True)
class TouchCue:
    direction: Direction
    level: int | None = None   # proximity band, 0 = closest, for left/right cues

    def __str__(self) -> str:
        if self.level is None:
            return self.direction.value
        return f"{self.direction.value}:{self.level}"


class TouchGuidance:
    """Two-phase audio-cue state machine running at 5 Hz.

    Phase 1 walks the finger horizontally until the target x is reached,
    phase 2 vertically, then a select cue fires. The finger may regress from
    the vertical phase to the horizontal one when x drifts past twice the
    tolerance (hysteresis against cue oscillation). Calls arriving within
    0.2 s of the last accepted step are dropped and return None.
    """

    RATE_PERIOD = 0.2
    # Proximity bands for the adaptive horizontal cue, in tolerance multiples.
    BANDS = (1.0, 3.0, 8.0)

    def __init__(self, target, tol_x: float, tol_y: float):
        self.target = (float(target[0]), float(target[1]))
        self.tol_x = float(tol_x)
        self.tol_y = float(tol_y)
        self.phase = Phase.ALIGN_X
        self.trace: list[tuple[float, Phase, TouchCue, float, float]] = []
        self._last_accepted: float | None = None

    def _level(self, dx: float) -> int:
        for lvl, mult in enumerate(self.BANDS):
            if abs(dx) <= mult * self.tol_x:
                return lvl
        return len(self.BANDS)

    def _horizontal_cue(self, dx: float) -> TouchCue:
        direction = Direction.LEFT if dx > 0 else Direction.RIGHT
        return TouchCue(direction, self._level(dx))

    def confirm_selection(self):
        """Selection input from the pilot; completes the run."""
        if self.phase is Phase.SELECT:
            self.phase = Phase.DONE

    def step(self, finger, t: float) -> TouchCue | None:
        if self._last_accepted is not None and t - self._last_accepted < self.RATE_PERIOD - 1e-9:
            return None
        self._last_accepted = t
        dx = float(finger[0]) - self.target[0]
        dy = float(finger[1]) - self.target[1]

        cue: TouchCue | None = None
        if self.phase is Phase.ALIGN_X:
            if abs(dx) <= self.tol_x:
                self.phase = Phase.ALIGN_Y
                cue = TouchCue(Direction.UP)
            else:
                cue = self._horizontal_cue(dx)
        elif self.phase is Phase.ALIGN_Y:
            if abs(dx) > 2.0 * self.tol_x:
                self.phase = Phase.ALIGN_X
                cue = self._horizontal_cue(dx)
            elif abs(dy) <= self.tol_y:
                self.phase = Phase.SELECT
                cue = TouchCue(Direction.SELECT)
            elif dy > 0:
                cue = TouchCue(Direction.UP)
            else:
                cue = TouchCue(Direction.DOWN)
        elif self.phase is Phase.SELECT:
            cue = TouchCue(Direction.SELECT)
        else:
            cue = None
        if cue is not None:
            self.trace.append((t, self.phase, cue, dx, dy))
        return cue


def trace_to_csv(trace) -> str:
    """Cue trace as ``t,phase,cue,dx,dy`` rows."""
    buf = io.StringIO()
    buf.write("t,phase,cue,dx,dy\n")
    for t, phase, cue, dx, dy in trace:
        buf.write(f"{t:.3f},{phase.value},{cue},{dx:.4f},{dy:.4f}\n")
    return buf.getvalue()
