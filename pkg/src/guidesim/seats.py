"""Free-seat analysis from a labeled 3D point map.

Pipeline: crop to the task rectangle, statistical outlier removal, height
band, ground projection, connected components on a raster (the two largest
are the chair rows), then a 2x3 cell split of the rows' bounding box. A cell
counts as occupied when person/backpack points dominate its central half.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import label as cc_label
from scipy.spatial import cKDTree

from .errors import RowsNotFound
from .geometry import RectBoundary
from .structuring import GridCell

CHAIR = "chair"
PERSON = "person"
BACKPACK = "backpack"
LABELS = (CHAIR, PERSON, BACKPACK)

_EIGHT_CONN = np.ones((3, 3), dtype=int)


def statistical_outlier_filter(points, k_neighbors: int, std_multiplier: float) -> np.ndarray:
    """Keep points whose mean k-nearest-neighbor distance is unexceptional.

    A point survives when its mean distance to the ``k_neighbors`` nearest
    other points is at most mean + std_multiplier * std of that statistic
    over the cloud. Returns a boolean keep-mask; with k_neighbors or fewer
    points everything is kept.
    """
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be at least 1")
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n <= k_neighbors:
        return np.ones(n, dtype=bool)
    tree = cKDTree(pts)
    dists, _ = tree.query(pts, k=k_neighbors + 1)
    mean_d = dists[:, 1:].mean(axis=1)
    cutoff = mean_d.mean() + std_multiplier * mean_d.std()
    return mean_d <= cutoff


@dataclass
class SeatParams:
    z_band: tuple[float, float] = (0.4, 1.9)
    occupancy_ratio_threshold: float = 0.2
    raster_res: float = 0.05
    outlier_k: int = 8
    outlier_std_multiplier: float = 2.0
    min_component_points: int = 20
    central_fraction: float = 0.5   # per-axis share of the cell that is evaluated


@dataclass
class SeatReport:
    """Free cells (row 1 nearer the front edge, column 1 at the pilot's left),
    plus the cell geometry and ratios used to decide them."""

    free_cells: list[GridCell]
    occupancy_ratio: dict[GridCell, float] = field(default_factory=dict)
    cell_bounds: dict[GridCell, tuple[float, float, float, float]] = field(default_factory=dict)


def analyze_seats(points, labels, rect: RectBoundary,
                  params: SeatParams | None = None) -> SeatReport:
    """Classify the six seats of a 2x3 chair block as free or occupied.

    ``points`` are world-frame xyz (z up); ``labels`` the matching semantic
    label strings. Invariant under a rigid transform applied jointly to the
    points and the rectangle, since all geometry runs in the rectangle frame.
    """
    params = params or SeatParams()
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    labs = np.asarray(labels)
    if len(pts) != len(labs):
        raise ValueError("points and labels length mismatch")

    inside = rect.contains(pts[:, :2])
    pts, labs = pts[inside], labs[inside]
    keep = statistical_outlier_filter(pts, params.outlier_k, params.outlier_std_multiplier)
    pts, labs = pts[keep], labs[keep]
    band = (pts[:, 2] >= params.z_band[0]) & (pts[:, 2] <= params.z_band[1])
    pts, labs = pts[band], labs[band]
    if len(pts) == 0:
        raise RowsNotFound("no points left after cropping and filtering")

    local = rect.to_local(pts[:, :2])   # a along travel, b toward the left

    # Raster over the local footprint; 8-connected components are candidate rows.
    res = params.raster_res
    a_min, b_min = local.min(axis=0)
    ia = np.floor((local[:, 0] - a_min) / res).astype(int)
    ib = np.floor((local[:, 1] - b_min) / res).astype(int)
    raster = np.zeros((ia.max() + 1, ib.max() + 1), dtype=bool)
    raster[ia, ib] = True
    comp, n_comp = cc_label(raster, structure=_EIGHT_CONN)
    point_comp = comp[ia, ib]
    counts = np.bincount(point_comp, minlength=n_comp + 1)[1:]
    big = [c + 1 for c in np.argsort(counts, kind="stable")[::-1]
           if counts[c] >= params.min_component_points]
    if len(big) < 2:
        raise RowsNotFound(
            f"found {len(big)} point components with >= {params.min_component_points} points")
    rows = big[:2]
    row_sel = np.isin(point_comp, rows)
    row_labs, row_local = labs[row_sel], local[row_sel]

    # Split the rows' bounding box into 2 row bands x 3 columns.
    a_lo, a_hi = row_local[:, 0].min(), row_local[:, 0].max()
    b_lo, b_hi = row_local[:, 1].min(), row_local[:, 1].max()
    a_edges = np.linspace(a_lo, a_hi, 3)
    b_edges = np.linspace(b_lo, b_hi, 4)

    report = SeatReport(free_cells=[])
    occupied_labels = np.isin(row_labs, (PERSON, BACKPACK))
    for r in range(2):
        for c in range(3):
            cell = GridCell(r + 1, c + 1)
            # Column 1 is at the pilot's left, the high-b end of the box.
            ar, br = (a_edges[r], a_edges[r + 1]), (b_edges[3 - c - 1], b_edges[3 - c])
            report.cell_bounds[cell] = (ar[0], ar[1], br[0], br[1])
            half = params.central_fraction / 2.0
            ca = (ar[0] + ar[1]) / 2.0
            cb = (br[0] + br[1]) / 2.0
            wa = (ar[1] - ar[0]) * half
            wb = (br[1] - br[0]) * half
            central = ((np.abs(row_local[:, 0] - ca) <= wa)
                       & (np.abs(row_local[:, 1] - cb) <= wb))
            total = int(central.sum())
            ratio = float(occupied_labels[central].sum() / total) if total else 0.0
            report.occupancy_ratio[cell] = ratio
            if ratio <= params.occupancy_ratio_threshold:
                report.free_cells.append(cell)
    report.free_cells.sort()
    return report
