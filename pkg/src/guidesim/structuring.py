"""Detection structuring: text matching, proximity clustering, grid assignment.

Works on synthetic text/box detections in pixel coordinates (y grows
downward, as in images), turning them into grid cells and dictionary matches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import (ClusterCollapse, DegenerateInput, NoiseBox, TargetDuplicated,
                     TargetMissing)
from .geometry import wrap_angle


class GridCell(NamedTuple):
    """1-based grid position: row counted from the top, column from the left."""

    row: int
    col: int


@dataclass(frozen=True)
class TextDetection:
    text: str
    center: tuple[float, float]   # pixels
    box: tuple[float, float]      # width, height in pixels

    def __post_init__(self):
        if self.box[0] <= 0 or self.box[1] <= 0:
            raise ValueError("box dimensions must be positive")


def levenshtein(a: str, b: str) -> int:
    """Minimal number of single-character insertions, deletions, substitutions."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[len(b)]


def match_name(words, name_list, max_dist: int) -> tuple[str, int] | None:
    """Best (name, distance) pair under the threshold, or None.

    Ties break toward the lower name index, then the lower word index.
    """
    if not name_list:
        raise ValueError("name_list must be non-empty")
    best: tuple[int, str] | None = None
    for name in name_list:
        for word in words:
            d = levenshtein(word, name)
            if best is None or d < best[0]:
                best = (d, name)
    if best is None or best[0] > max_dist:
        return None
    return best[1], best[0]


@dataclass(frozen=True)
class Cluster:
    indices: tuple[int, ...]
    centroid: tuple[float, float]


def cluster_detections(detections, eps: float) -> list[Cluster]:
    """Connected components of the graph linking detections within ``eps`` pixels.

    Clusters are ordered by their smallest member index; members are sorted.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    centers = np.array([d.center for d in detections], dtype=float).reshape(-1, 2)
    n = len(centers)
    if n == 0:
        return []
    dists = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=2)
    adjacency = dists <= eps
    seen = np.zeros(n, dtype=bool)
    clusters = []
    for i in range(n):
        if seen[i]:
            continue
        stack, members = [i], []
        seen[i] = True
        while stack:
            k = stack.pop()
            members.append(k)
            for j in np.flatnonzero(adjacency[k]):
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        members.sort()
        centroid = centers[members].mean(axis=0)
        clusters.append(Cluster(tuple(members), (float(centroid[0]), float(centroid[1]))))
    return clusters


def _min_area_rect_angle(points: np.ndarray) -> float:
    """Orientation of the minimum-area box, canonicalized to (-45, 45] degrees.

    The mod-90 fold keeps a roughly upright grid upright: small camera tilts
    in either direction rotate out without swapping the grid axes.
    """
    try:
        hull = ConvexHull(points)
    except QhullError as exc:
        raise DegenerateInput(f"degenerate centroid configuration: {exc}") from exc
    verts = points[hull.vertices]
    quarter = math.pi / 2
    best_angle, best_area = 0.0, math.inf
    m = len(verts)
    for k in range(m):
        edge = verts[(k + 1) % m] - verts[k]
        norm = np.hypot(edge[0], edge[1])
        if norm < 1e-12:
            continue
        theta = (math.atan2(edge[1], edge[0]) + quarter / 2) % quarter - quarter / 2
        c, s = math.cos(-theta), math.sin(-theta)
        rot = points @ np.array([[c, -s], [s, c]]).T
        extent = rot.max(axis=0) - rot.min(axis=0)
        area = float(extent[0] * extent[1])
        if area < best_area - 1e-12 or (abs(area - best_area) <= 1e-12 and abs(theta) < abs(best_angle)):
            best_area, best_angle = area, theta
    return best_angle


def rectify_centers(centroids) -> np.ndarray:
    """Normalize cluster centers into the unit square via their minimum-area box.

    The box orientation (taken mod 90 degrees) is rotated out, then each axis
    is scaled to [0, 1]. Collinear input raises DegenerateInput.
    """
    pts = np.asarray(centroids, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise DegenerateInput("rectification needs at least 3 centers")
    theta = _min_area_rect_angle(pts)
    c, s = math.cos(-theta), math.sin(-theta)
    rot = pts @ np.array([[c, -s], [s, c]]).T
    lo = rot.min(axis=0)
    extent = rot.max(axis=0) - lo
    scale = max(extent)
    if min(extent) < 1e-9 * max(scale, 1.0):
        raise DegenerateInput("centers are collinear within tolerance")
    return (rot - lo) / extent


def _kmeans_1d(values: np.ndarray, k: int, rng: np.random.Generator,
               restarts: int = 100) -> np.ndarray:
    """Lloyd's algorithm on a line, quantile-seeded, restarting on empty clusters.

    Returns per-value labels 0..k-1 ordered by ascending cluster center.
    """
    if k == 1:
        return np.zeros(len(values), dtype=int)
    centers = np.quantile(values, (np.arange(k) + 0.5) / k)
    for attempt in range(restarts + 1):
        labels = None
        for _ in range(200):
            d = np.abs(values[:, None] - centers[None, :])
            new_labels = np.argmin(d, axis=1)
            if np.any(np.bincount(new_labels, minlength=k) == 0):
                labels = None
                break
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            centers = np.array([values[labels == j].mean() for j in range(k)])
        if labels is not None:
            order = np.argsort(centers, kind="stable")
            rank = np.empty(k, dtype=int)
            rank[order] = np.arange(k)
            return rank[labels]
        lo, hi = float(values.min()), float(values.max())
        centers = np.sort(rng.uniform(lo, hi, size=k))
    raise ClusterCollapse(f"k-means with k={k} kept an empty cluster after {restarts} restarts")


def assign_rows_cols(rectified_points, n_rows: int, n_cols: int, seed: int = 0) -> list[GridCell]:
    """Grid position of each rectified point via 1D k-means per axis.

    Vertical components cluster into ``n_rows`` groups (row 1 at the top,
    i.e. the smallest y), horizontal components into ``n_cols`` (column 1 at
    the left). Invariant under uniform scaling and translation of the input.
    """
    pts = np.asarray(rectified_points, dtype=float).reshape(-1, 2)
    if n_rows < 1 or n_cols < 1:
        raise ValueError("n_rows and n_cols must be at least 1")
    if len(pts) > n_rows * n_cols:
        raise ValueError(f"{len(pts)} points cannot fill a {n_rows}x{n_cols} grid")
    rng = np.random.default_rng(seed)
    rows = _kmeans_1d(pts[:, 1], n_rows, rng)
    cols = _kmeans_1d(pts[:, 0], n_cols, rng)
    return [GridCell(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)]


def dbscan_1d(values, eps: float, min_pts: int) -> list[int]:
    """DBSCAN on scalars: cluster label per value, -1 for noise.

    A value is a core point when at least ``min_pts`` values (itself
    included) lie within ``eps``. Labels are assigned in input order, so the
    result is deterministic for a given input sequence.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be at least 1")
    v = np.asarray(values, dtype=float).ravel()
    n = len(v)
    labels = np.full(n, -1, dtype=int)
    if n == 0:
        return []
    neighbor = np.abs(v[:, None] - v[None, :]) <= eps
    core = neighbor.sum(axis=1) >= min_pts
    cluster = 0
    visited = np.zeros(n, dtype=bool)
    for i in range(n):
        if visited[i] or not core[i]:
            continue
        queue = [i]
        visited[i] = True
        labels[i] = cluster
        while queue:
            k = queue.pop(0)
            for j in np.flatnonzero(neighbor[k]):
                if labels[j] == -1:
                    labels[j] = cluster
                if core[j] and not visited[j]:
                    visited[j] = True
                    queue.append(int(j))
        cluster += 1
    return labels.tolist()


def grocery_grid(boxes, row_eps_factor: float = 0.5, min_pts: int = 1) -> list[GridCell]:
    """Shelf position of each detected box: DBSCAN rows, x-sorted columns.

    ``boxes`` is a sequence of (center (x, y) px, size (w, h) px). Rows come
    from DBSCAN on center-y with eps = median box height * row_eps_factor,
    ordered top to bottom; within a row the 1-based column index is the rank
    by center-x. Boxes labeled noise raise NoiseBox.
    """
    if not boxes:
        raise ValueError("at least one box required")
    centers = np.array([c for c, _ in boxes], dtype=float)
    heights = np.array([s[1] for _, s in boxes], dtype=float)
    eps = float(np.median(heights)) * row_eps_factor
    labels = dbscan_1d(centers[:, 1], eps, min_pts)
    noise = [i for i, l in enumerate(labels) if l == -1]
    if noise:
        raise NoiseBox(f"boxes {noise} could not be assigned to a row", noise)
    label_ids = sorted(set(labels), key=lambda l: centers[[i for i, x in enumerate(labels) if x == l], 1].mean())
    row_of = {l: r + 1 for r, l in enumerate(label_ids)}
    cells: list[GridCell | None] = [None] * len(boxes)
    for l in label_ids:
        members = [i for i, x in enumerate(labels) if x == l]
        members.sort(key=lambda i: (centers[i, 0], i))
        for rank, i in enumerate(members, start=1):
            cells[i] = GridCell(row_of[l], rank)
    return cells  # type: ignore[return-value]


def match_keywords(words, dictionaries, max_dist: int) -> str | None:
    """Product whose keyword dictionary matches the most words, or None.

    A keyword counts as matched when some word is within ``max_dist`` edit
    distance. Ties break by the smaller total distance of matched keywords,
    then by dictionary insertion order. None when the best match count is 0.
    """
    if not dictionaries:
        raise ValueError("dictionaries must be non-empty")
    best = None  # (count, total_distance, product)
    for product, keywords in dictionaries.items():
        count, total = 0, 0
        for kw in sorted(keywords):
            dists = [levenshtein(w, kw) for w in words]
            if dists and min(dists) <= max_dist:
                count += 1
                total += min(dists)
        if count == 0:
            continue
        if best is None or count > best[0] or (count == best[0] and total < best[1]):
            best = (count, total, product)
    return best[2] if best else None


def finder_side(object_positions, target_label: str) -> str:
    """'left' or 'right' half of the floor for the target (x >= 0.5 is right)."""
    xs = [x for label, x in object_positions if label == target_label]
    if not xs:
        raise TargetMissing(f"target {target_label!r} not detected")
    if len(xs) > 1:
        raise TargetDuplicated(f"target {target_label!r} detected {len(xs)} times")
    return "left" if xs[0] < 0.5 else "right"


def finder_proximity(pointing_dir: float, target_dir: float, levels: int) -> int:
    """Quantized angular closeness of the pointing direction; 0 means aligned."""
    if levels < 2:
        raise ValueError("levels must be at least 2")
    off = abs(wrap_angle(target_dir - pointing_dir))
    return min(int(off / math.pi * levels), levels - 1)
