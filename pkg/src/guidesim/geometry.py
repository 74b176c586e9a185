"""Shared 2D geometry helpers: angle wrapping, rotations, the task rectangle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(angle):
    """Wrap an angle (scalar or array) to the half-open interval (-pi, pi]."""
    a = np.asarray(angle, dtype=float)
    w = (a + np.pi) % TWO_PI - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    if np.isscalar(angle) or w.ndim == 0:
        return float(w)
    return w


def unit_vector(angle: float) -> np.ndarray:
    return np.array([math.cos(angle), math.sin(angle)])


def rot2d(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def perp_left(v: np.ndarray) -> np.ndarray:
    """Rotate a 2D vector by +90 degrees (counter-clockwise)."""
    return np.array([-v[1], v[0]])


@dataclass(frozen=True)
class Pose2D:
    """Planar pose: position in metres, heading in radians (CCW, wrapped)."""

    x: float
    y: float
    heading: float

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def moved(self, dx: float, dy: float, dheading: float = 0.0) -> "Pose2D":
        return Pose2D(self.x + dx, self.y + dy, wrap_angle(self.heading + dheading))


# Edge names of the task rectangle, in counter-clockwise corner order
# (front-left, front-right, back-right, back-left).
EDGE_NAMES = ("front", "right", "back", "left")
_EDGE_CORNERS = {"front": (0, 1), "right": (1, 2), "back": (2, 3), "left": (3, 0)}


@dataclass(frozen=True)
class RectBoundary:
    """Known-dimension task rectangle given by its four world-frame corners.

    Corners are ordered (front-left, front-right, back-right, back-left),
    counter-clockwise. ``dims`` is (length, width): length runs front to back
    along the travel direction, width spans the front edge.
    """

    corners: np.ndarray          # shape (4, 2)
    dims: tuple[float, float]

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=float).reshape(4, 2)
        object.__setattr__(self, "corners", c)
        object.__setattr__(self, "dims", (float(self.dims[0]), float(self.dims[1])))

    @classmethod
    def from_pose(cls, front_center, heading: float, dims) -> "RectBoundary":
        """Build the rectangle from the front-edge midpoint and travel heading."""
        length, width = float(dims[0]), float(dims[1])
        o = np.asarray(front_center, dtype=float)
        u = unit_vector(heading)
        v = perp_left(u)
        half = 0.5 * width
        corners = np.array([
            o + half * v,
            o - half * v,
            o - half * v + length * u,
            o + half * v + length * u,
        ])
        return cls(corners, (length, width))

    @property
    def travel_dir(self) -> np.ndarray:
        """Unit vector pointing from the front edge toward the back edge."""
        d = self.corners[3] - self.corners[0]
        return d / np.linalg.norm(d)

    @property
    def left_dir(self) -> np.ndarray:
        return perp_left(self.travel_dir)

    @property
    def heading(self) -> float:
        u = self.travel_dir
        return math.atan2(u[1], u[0])

    @property
    def center(self) -> np.ndarray:
        return self.corners.mean(axis=0)

    @property
    def front_center(self) -> np.ndarray:
        return 0.5 * (self.corners[0] + self.corners[1])

    @property
    def back_center(self) -> np.ndarray:
        return 0.5 * (self.corners[2] + self.corners[3])

    def edge(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        i, j = _EDGE_CORNERS[name]
        return self.corners[i], self.corners[j]

    def contains(self, points) -> np.ndarray:
        """Inclusive point-in-rectangle test via the four CCW half-planes."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.ones(len(p), dtype=bool)
        for i in range(4):
            a = self.corners[i]
            b = self.corners[(i + 1) % 4]
            e = b - a
            cross = e[0] * (p[:, 1] - a[1]) - e[1] * (p[:, 0] - a[0])
            inside &= cross >= 0.0
        return inside

    def to_local(self, points) -> np.ndarray:
        """Map world points to rectangle coordinates (a along travel, b toward left).

        The front-edge midpoint maps to a = 0; a grows toward the back edge.
        """
        p = np.atleast_2d(np.asarray(points, dtype=float)) - self.front_center
        u = self.travel_dir
        v = self.left_dir
        return np.column_stack([p @ u, p @ v])

    def flipped(self) -> "RectBoundary":
        """The same rectangle with front and back swapped (180 degree relabel)."""
        c = self.corners
        return RectBoundary(np.array([c[2], c[3], c[0], c[1]]), self.dims)

    def oriented_toward(self, heading: float) -> "RectBoundary":
        """Return this rectangle, flipped if needed, so travel aligns with ``heading``."""
        if float(self.travel_dir @ unit_vector(heading)) >= 0.0:
            return self
        return self.flipped()

    def is_valid(self, side_tol: float = 1e-6, angle_tol_deg: float = 1e-3) -> bool:
        c = self.corners
        sides = [c[(i + 1) % 4] - c[i] for i in range(4)]
        lens = [np.linalg.norm(s) for s in sides]
        if abs(lens[0] - lens[2]) > side_tol or abs(lens[1] - lens[3]) > side_tol:
            return False
        for i in range(4):
            a = sides[i] / lens[i]
            b = sides[(i + 1) % 4] / lens[(i + 1) % 4]
            ang = math.degrees(abs(math.acos(np.clip(-(a @ b), -1.0, 1.0)) - math.pi / 2))
            if ang > 90.0 + angle_tol_deg or abs(a @ b) > math.sin(math.radians(angle_tol_deg)):
                return False
        area = 0.0
        for i in range(4):
            j = (i + 1) % 4
            area += c[i, 0] * c[j, 1] - c[j, 0] * c[i, 1]
        return area > 0.0
