"""2D occupancy grid: point integration, boundary crop, obstacle inflation.

Cell values are bytes: 0 is free space, 255 occupied, intermediate values are
inflated cost. The grid is a flat uniform raster; cell (ix, iy) covers the
world square [origin + ix*res, origin + (ix+1)*res) x [... iy ...).
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from .geometry import RectBoundary

log = logging.getLogger(__name__)

OCCUPIED = 255
LETHAL = 254

DEFAULT_RESOLUTION = 0.05


@dataclass
class OccupancyGrid:
    """Uniform byte grid with a metric origin (world position of cell (0,0) corner)."""

    origin: tuple[float, float]
    resolution: float
    cells: np.ndarray  # uint8, shape (height, width)

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        self.cells = np.asarray(self.cells, dtype=np.uint8)
        self.origin = (float(self.origin[0]), float(self.origin[1]))

    @classmethod
    def blank(cls, origin, resolution: float, width: int, height: int) -> "OccupancyGrid":
        return cls(origin, resolution, np.zeros((height, width), dtype=np.uint8))

    @classmethod
    def from_bounds(cls, xmin, ymin, xmax, ymax, resolution: float = DEFAULT_RESOLUTION) -> "OccupancyGrid":
        width = max(1, int(np.ceil((xmax - xmin) / resolution)))
        height = max(1, int(np.ceil((ymax - ymin) / resolution)))
        return cls.blank((xmin, ymin), resolution, width, height)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.origin, self.resolution, self.cells.copy())

    def world_to_cell(self, points) -> np.ndarray:
        """Integer (ix, iy) indices of the cells containing the given points."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        rel = (p - np.asarray(self.origin)) / self.resolution
        return np.floor(rel).astype(np.int64)

    def cell_center(self, ix, iy) -> np.ndarray:
        ox, oy = self.origin
        return np.array([ox + (np.asarray(ix) + 0.5) * self.resolution,
                         oy + (np.asarray(iy) + 0.5) * self.resolution]).T

    def cell_centers(self) -> np.ndarray:
        """(height, width, 2) array of world coordinates of all cell centers."""
        ox, oy = self.origin
        xs = ox + (np.arange(self.width) + 0.5) * self.resolution
        ys = oy + (np.arange(self.height) + 0.5) * self.resolution
        gx, gy = np.meshgrid(xs, ys)
        return np.dstack([gx, gy])

    def in_bounds(self, ij: np.ndarray) -> np.ndarray:
        ij = np.atleast_2d(ij)
        return ((ij[:, 0] >= 0) & (ij[:, 0] < self.width)
                & (ij[:, 1] >= 0) & (ij[:, 1] < self.height))


def integrate_points(grid: OccupancyGrid, points) -> OccupancyGrid:
    """Mark every cell containing at least one point as occupied (255).

    Points outside the grid extent are ignored (logged at debug level).
    Idempotent; never lowers a cell value.
    """
    out = grid.copy()
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return out
    ij = out.world_to_cell(pts)
    ok = out.in_bounds(ij)
    n_dropped = int((~ok).sum())
    if n_dropped:
        log.debug("integrate_points: %d points outside grid extent ignored", n_dropped)
    ij = ij[ok]
    out.cells[ij[:, 1], ij[:, 0]] = OCCUPIED
    return out


def crop_to_boundary(grid: OccupancyGrid, rect: RectBoundary) -> OccupancyGrid:
    """Reset cells whose centers fall outside the task rectangle to 0."""
    out = grid.copy()
    centers = out.cell_centers().reshape(-1, 2)
    inside = rect.contains(centers).reshape(out.height, out.width)
    out.cells[~inside] = 0
    return out


def inflate(grid: OccupancyGrid, robot_radius: float, decay_width: float = 0.5) -> OccupancyGrid:
    """Spread cost around occupied cells to keep plans clear of obstacles.

    Cells within ``robot_radius`` (center-to-center, metres) of any occupied
    cell become 254; beyond that the cost falls linearly to 0 over
    ``decay_width``. Occupied cells stay at 255. Equivalent to taking the
    elementwise max over the inflation of each obstacle cell separately,
    because cost decreases with distance.
    """
    if robot_radius < 0:
        raise ValueError("robot_radius must be non-negative")
    out = grid.copy()
    occ = out.cells == OCCUPIED
    if not occ.any():
        out.cells = np.zeros_like(out.cells)
        return out
    dist = distance_transform_edt(~occ) * grid.resolution
    cost = np.zeros(out.cells.shape, dtype=np.float64)
    cost[dist <= robot_radius] = LETHAL
    if decay_width > 0:
        ring = (dist > robot_radius) & (dist < robot_radius + decay_width)
        cost[ring] = np.rint(LETHAL * (1.0 - (dist[ring] - robot_radius) / decay_width))
    out.cells = np.clip(cost, 0, LETHAL).astype(np.uint8)
    out.cells[occ] = OCCUPIED
    return out


def course_costmap(grid: OccupancyGrid, rect: RectBoundary, robot_radius: float,
                   decay_width: float = 0.5, goal_extension: float = 1.3) -> OccupancyGrid:
    """Planning costmap for a bounded course: crop, wall the sides, inflate.

    Obstacle cells outside the rectangle are dropped, virtual walls are laid
    just outside the left and right edges so inflation keeps plans off the
    course limits, and everything outside the course is lethal, except a
    ``goal_extension`` strip beyond the back edge where the goal sits. The
    front remains unwalled (only masked), so a start right behind the front
    edge is not swallowed by wall inflation.
    """
    out = crop_to_boundary(grid, rect)
    length, width = rect.dims
    local = rect.to_local(out.cell_centers().reshape(-1, 2))
    a = local[:, 0].reshape(out.height, out.width)
    b = local[:, 1].reshape(out.height, out.width)
    band = 2.0 * out.resolution
    walls = ((np.abs(b) > width / 2) & (np.abs(b) <= width / 2 + band)
             & (a >= -band) & (a <= length + goal_extension))
    out.cells[walls] = OCCUPIED
    out = inflate(out, robot_radius, decay_width)
    course = (((a >= 0) & (a <= length)) | ((a > length) & (a <= length + goal_extension)))
    course &= np.abs(b) <= width / 2
    out.cells[~course] = np.maximum(out.cells[~course], LETHAL)
    return out


def grid_to_text(grid: OccupancyGrid) -> str:
    """Serialize as PGM-style (P2) text for golden-file comparison.

    Header line: ``width height resolution origin_x origin_y``; after that,
    one line of space-separated cell values per grid row, row-major.
    """
    buf = io.StringIO()
    ox, oy = grid.origin
    buf.write(f"{grid.width} {grid.height} {grid.resolution:.10g} {ox:.10g} {oy:.10g}\n")
    for row in grid.cells:
        buf.write(" ".join(str(int(v)) for v in row))
        buf.write("\n")
    return buf.getvalue()


def grid_from_text(text: str) -> OccupancyGrid:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    w, h, res, ox, oy = lines[0].split()
    cells = np.array([[int(v) for v in ln.split()] for ln in lines[1:]], dtype=np.uint8)
    if cells.shape != (int(h), int(w)):
        raise ValueError(f"grid body {cells.shape} does not match header ({h}, {w})")
    return OccupancyGrid((float(ox), float(oy)), float(res), cells)
