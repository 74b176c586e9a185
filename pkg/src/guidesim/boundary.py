"""Task-boundary estimation: ground-plane fit and rectangle RANSAC.

The rectangle model is rigid: dimensions are known, so a hypothesis has only
three degrees of freedom (translation + rotation). Hypotheses are generated
by sampling two points assumed to lie on the same side (long) edge, which
fixes the rotation; the rectangle is then slid along that direction to the
placement that captures the most inliers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryNotFound, DegenerateInput
from .geometry import RectBoundary, perp_left

_EDGE_ORDER = ("front", "back", "left", "right")


@dataclass(frozen=True)
class Plane:
    """Plane n . p = d with unit normal n."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    def distance(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return p @ self.normal - self.offset


def fit_ground_plane(points) -> tuple[Plane, float]:
    """Total-least-squares plane through 3D points.

    Returns the plane and the RMS of point-to-plane residuals. The normal is
    oriented so its z component is non-negative (first non-zero component
    positive when z is zero). Raises DegenerateInput for fewer than 3 points
    or collinear input.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) < 3:
        raise DegenerateInput("plane fit needs at least 3 points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    scale = s[0] if s[0] > 0 else 1.0
    if s[1] <= 1e-12 * scale:
        raise DegenerateInput("points are collinear within tolerance")
    normal = vt[2]
    if normal[2] < 0 or (normal[2] == 0 and (normal[0] < 0 or (normal[0] == 0 and normal[1] < 0))):
        normal = -normal
    offset = float(normal @ centroid)
    rms = float(np.sqrt(np.mean((centered @ normal) ** 2)))
    return Plane(normal, offset), rms


@dataclass
class RansacParams:
    iterations: int = 500
    inlier_tol: float = 0.05      # metres, distance to the rectangle outline
    min_edge_points: int = 20
    angle_tol_deg: float = 5.0
    seed: int = 0


def _outline_distance(a, b, a0, a1, b0, b1):
    """Distance from points (a, b) to the outline of the axis box [a0,a1]x[b0,b1]."""
    da = np.maximum(a0 - a, a - a1)
    db = np.maximum(b0 - b, b - b1)
    outside = (da > 0) | (db > 0)
    d_out = np.hypot(np.maximum(da, 0.0), np.maximum(db, 0.0))
    d_in = np.minimum(-da, -db)
    return np.where(outside, d_out, d_in)


def _edge_distances(a, b, a0, a1, b0, b1):
    """Distance from each point to each of the four edge segments.

    Returns an (n, 4) array ordered (front, back, left-b1, right-b0) where
    front is the a0 edge and the b1 edge is the rectangle's left side.
    """
    def seg_dist(along, across, lo, hi, offset):
        t = np.clip(along, lo, hi)
        return np.hypot(along - t, across - offset)

    d_front = seg_dist(b, a, b0, b1, a0)
    d_back = seg_dist(b, a, b0, b1, a1)
    d_left = seg_dist(a, b, a0, a1, b1)
    d_right = seg_dist(a, b, a0, a1, b0)
    return np.column_stack([d_front, d_back, d_left, d_right])


def _slide_window(a_band: np.ndarray, span: float) -> float:
    """Start of the densest window of width ``span`` over sorted values."""
    srt = np.sort(a_band)
    hi = np.searchsorted(srt, srt + span, side="right")
    k = int(np.argmax(hi - np.arange(len(srt))))
    return float(srt[k])


def _membership(a, b, a0, a1, b0, b1, tol):
    """(n, 4) boolean matrix assigning in-tolerance points to their nearest edge."""
    edge_d = _edge_distances(a, b, a0, a1, b0, b1)
    nearest = np.argmin(edge_d, axis=1)
    members = np.zeros((len(a), 4), dtype=bool)
    in_tol = edge_d[np.arange(len(a)), nearest] <= tol
    members[np.arange(len(a)), nearest] = in_tol
    return members


def _refit(a, b, members, a0, a1, b0, b1, length, width):
    """Re-estimate the frame offsets from per-edge means, keeping rigid dims.

    ``members`` is the (n, 4) boolean edge-membership matrix in the order
    (front, back, left, right).
    """
    n_left = members[:, 2].sum()
    n_right = members[:, 3].sum()
    b_lo, b_hi = b0, b1
    if n_left and n_right:
        center = 0.5 * (b[members[:, 2]].mean() + b[members[:, 3]].mean())
        b_lo, b_hi = center - 0.5 * width, center + 0.5 * width
    elif n_left:
        b_hi = b[members[:, 2]].mean()
        b_lo = b_hi - width
    elif n_right:
        b_lo = b[members[:, 3]].mean()
        b_hi = b_lo + width

    n_front = members[:, 0].sum()
    n_back = members[:, 1].sum()
    if n_front and n_back:
        a_new = (n_front * a[members[:, 0]].mean()
                 + n_back * (a[members[:, 1]].mean() - length)) / (n_front + n_back)
    elif n_front:
        a_new = a[members[:, 0]].mean()
    elif n_back:
        a_new = a[members[:, 1]].mean() - length
    else:
        a_new = a0
    return a_new, a_new + length, b_lo, b_hi


def _polish(pts, u, a0, b_lo, b_hi, length, width, tol, rounds: int = 3):
    """Alternate edge membership, side-edge rotation, and offset refits.

    Rotation comes from the principal direction of the per-edge demeaned
    side-edge members, so corner points cannot bias the translation the way
    a single refit pass would.
    """
    for _ in range(rounds):
        v = perp_left(u)
        a = pts @ u
        b = pts @ v
        members = _membership(a, b, a0, a0 + length, b_lo, b_hi, tol)
        blocks = [pts[members[:, k]] - pts[members[:, k]].mean(axis=0)
                  for k in (2, 3) if members[:, k].sum() >= 2]
        if blocks:
            _, _, vt = np.linalg.svd(np.vstack(blocks), full_matrices=False)
            d = vt[0]
            if float(d @ u) < 0:
                d = -d
            u = d
            v = perp_left(u)
            a = pts @ u
            b = pts @ v
        a0, _, b_lo, b_hi = _refit(a, b, members, a0, a0 + length, b_lo, b_hi,
                                   length, width)
    return u, a0, b_lo, b_hi


def _edge_line_angles_ok(pts, members, angle_tol_deg):
    """Check near-perpendicularity of unconstrained per-edge line fits."""
    dirs = {}
    for k in range(4):
        sel = pts[members[:, k]]
        if len(sel) < 2:
            continue
        c = sel - sel.mean(axis=0)
        _, _, vt = np.linalg.svd(c, full_matrices=False)
        dirs[k] = vt[0]
    short_edges = [dirs[k] for k in (0, 1) if k in dirs]
    long_edges = [dirs[k] for k in (2, 3) if k in dirs]
    for se in short_edges:
        for le in long_edges:
            ang = math.degrees(abs(math.asin(np.clip(abs(se @ le), 0.0, 1.0))))
            if ang > angle_tol_deg:
                return False
    return True


def detect_boundary(edge_points, dims, params: RansacParams | None = None) -> RectBoundary:
    """RANSAC fit of the known-dimension task rectangle to noisy edge points.

    Validation of a candidate requires (1) near-90-degree angles between the
    unconstrained per-edge line refits and (2) enough points on each edge,
    where one of the two short edges (front/back) is allowed to fall below
    the threshold so three-edge views still succeed.

    The front/back labeling of the result is conventional (chosen from the
    data); callers that know the approach direction can reorient with
    ``RectBoundary.oriented_toward``.
    """
    params = params or RansacParams()
    pts = np.asarray(edge_points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 2:
        raise DegenerateInput("rectangle fit needs at least 2 points")
    length, width = float(dims[0]), float(dims[1])
    tol = params.inlier_tol
    rng = np.random.default_rng(params.seed)

    best_raw = 0
    best = None  # (count, u, a0, b_lo, b_hi, members)

    for _ in range(params.iterations):
        i, j = rng.choice(n, size=2, replace=False)
        d = pts[j] - pts[i]
        norm = np.hypot(d[0], d[1])
        if norm < 1e-9:
            continue
        u = d / norm
        v = perp_left(u)
        a = pts @ u
        b = pts @ v
        b_edge = b[i]

        for side in (1.0, -1.0):
            b_lo = min(b_edge, b_edge + side * width)
            b_hi = max(b_edge, b_edge + side * width)
            in_band = (np.abs(b - b_lo) <= tol) | (np.abs(b - b_hi) <= tol)
            if in_band.sum() < 2:
                continue
            window = _slide_window(a[in_band], length + 2 * tol)
            a0 = window + tol
            dist = _outline_distance(a, b, a0, a0 + length, b_lo, b_hi)
            count = int((dist <= tol).sum())
            best_raw = max(best_raw, count)
            if best is not None and count <= best[0]:
                continue

            ur, a0r, b_lor, b_hir = _polish(pts, u, a0, b_lo, b_hi, length, width, tol)
            vr = perp_left(ur)
            ar = pts @ ur
            br = pts @ vr
            members = _membership(ar, br, a0r, a0r + length, b_lor, b_hir, tol)
            count_r = int(members.any(axis=1).sum())
            best_raw = max(best_raw, count_r)
            if best is not None and count_r <= best[0]:
                continue

            counts = members.sum(axis=0)
            if counts[2] < params.min_edge_points or counts[3] < params.min_edge_points:
                continue
            if max(counts[0], counts[1]) < params.min_edge_points:
                continue
            if not _edge_line_angles_ok(pts, members, params.angle_tol_deg):
                continue
            best = (count_r, ur, a0r, b_lor, b_hir, members)

    if best is None:
        raise BoundaryNotFound(
            f"no rectangle hypothesis validated after {params.iterations} iterations",
            best_inlier_count=best_raw)

    _, u, a0, b_lo, b_hi, members = best
    # Conventional front choice: the short edge nearer the inlier mass.
    inl = members.any(axis=1)
    a_in = (pts[inl] @ u)
    if a_in.mean() - (a0 + 0.5 * length) > 0:
        u = -u
        a0 = -(a0 + length)
        b_lo, b_hi = -b_hi, -b_lo
    v = perp_left(u)
    corners = np.array([
        a0 * u + b_hi * v,
        a0 * u + b_lo * v,
        (a0 + length) * u + b_lo * v,
        (a0 + length) * u + b_hi * v,
    ])
    return RectBoundary(corners, (length, width))
