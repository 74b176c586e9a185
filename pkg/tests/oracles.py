"""Independent brute-force oracles the tests check the library against.

Each oracle reimplements a contract from first principles (exhaustive
enumeration, full DP tables, pairwise distances) without touching the
library internals it verifies.
"""
import heapq
import math

import numpy as np

NEIGHBORS = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
STEP_LEN = [math.hypot(dx, dy) for dx, dy in NEIGHBORS]


def dijkstra_cost(costmap, start, goal, lethal=254, gain=10.0):
    """Min path cost on the 8-connected grid graph, inf when unreachable."""
    (sx, sy), = costmap.world_to_cell([start])
    (gx, gy), = costmap.world_to_cell([goal])
    w, h = costmap.width, costmap.height
    cells = costmap.cells
    res = costmap.resolution
    factor = 1.0 + cells.astype(float).ravel() / 255.0 * gain
    dist = np.full(w * h, np.inf)
    s, t = sy * w + sx, gy * w + gx
    dist[s] = 0.0
    heap = [(0.0, s)]
    while heap:
        d, idx = heapq.heappop(heap)
        if d > dist[idx]:
            continue
        if idx == t:
            return d
        iy, ix = divmod(idx, w)
        for k, (dx, dy) in enumerate(NEIGHBORS):
            nx, ny = ix + dx, iy + dy
            if not (0 <= nx < w and 0 <= ny < h) or cells[ny, nx] >= lethal:
                continue
            nidx = ny * w + nx
            nd = d + res * STEP_LEN[k] * factor[nidx]
            if nd < dist[nidx]:
                dist[nidx] = nd
                heapq.heappush(heap, (nd, nidx))
    return dist[t]


def levenshtein_table(a, b):
    """Full O(nm) DP table edit distance."""
    n, m = len(a), len(b)
    table = np.zeros((n + 1, m + 1), dtype=int)
    table[:, 0] = np.arange(n + 1)
    table[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            table[i, j] = min(table[i - 1, j] + 1,
                              table[i, j - 1] + 1,
                              table[i - 1, j - 1] + (a[i - 1] != b[j - 1]))
    return int(table[n, m])


def union_find_clusters(centers, eps):
    """Partition by union-find over all pairs within eps; frozenset of frozensets."""
    n = len(centers)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(np.asarray(centers[i]) - np.asarray(centers[j])) <= eps:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), set()).add(i)
    return frozenset(frozenset(g) for g in groups.values())


def gap_components_1d(values, eps):
    """Cluster labels for min_pts=1 DBSCAN: split sorted values at gaps > eps.

    Labels are numbered by each cluster's first appearance in input order.
    """
    n = len(values)
    if n == 0:
        return []
    order = np.argsort(values, kind="stable")
    comp_of = np.zeros(n, dtype=int)
    comp = 0
    for pos in range(1, n):
        if values[order[pos]] - values[order[pos - 1]] > eps:
            comp += 1
        comp_of[order[pos]] = comp
    comp_of[order[0]] = 0
    # renumber by first appearance in the input
    seen = {}
    labels = []
    for c in comp_of:
        if c not in seen:
            seen[c] = len(seen)
        labels.append(seen[c])
    return labels


def brute_force_inflate(cells, resolution, robot_radius, decay_width):
    """Pairwise-distance inflation oracle, same contract as mapping.inflate."""
    occ = np.argwhere(cells == 255)
    out = np.zeros(cells.shape, dtype=np.uint8)
    if len(occ) == 0:
        return out
    h, w = cells.shape
    for iy in range(h):
        for ix in range(w):
            d = np.min(np.hypot(occ[:, 1] - ix, occ[:, 0] - iy)) * resolution
            if d <= robot_radius:
                out[iy, ix] = 254
            elif decay_width > 0 and d < robot_radius + decay_width:
                out[iy, ix] = min(254, int(np.rint(254 * (1 - (d - robot_radius) / decay_width))))
    out[cells == 255] = 255
    return out


def point_in_ccw_quad(point, corners):
    """Half-plane test against a CCW quad, inclusive edges."""
    p = np.asarray(point, dtype=float)
    for i in range(4):
        a = np.asarray(corners[i])
        b = np.asarray(corners[(i + 1) % 4])
        if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) < 0:
            return False
    return True


def arc_walk_heading(waypoints, pos, lookahead):
    """Reference heading: nearest vertex, walk vertex arcs to >= lookahead."""
    wp = np.asarray(waypoints, dtype=float)
    pos = np.asarray(pos, dtype=float)
    nearest = min(range(len(wp)), key=lambda i: (np.linalg.norm(wp[i] - pos), i))
    arc = 0.0
    target = wp[-1]
    for k in range(nearest + 1, len(wp)):
        arc += np.linalg.norm(wp[k] - wp[k - 1])
        if arc >= lookahead:
            target = wp[k]
            break
    return math.atan2(target[1] - pos[1], target[0] - pos[0])


def exhaustive_insertion(rack, new, total_order):
    """Try every slot; the unique order-preserving one gives side/moves.

    Returns (side, position, moves) matching the documented convention:
    moves = min(slot, len(rack) - slot), side left on ties, position counted
    from the chosen side.
    """
    order_index = {s: i for i, s in enumerate(total_order)}
    valid = []
    for slot in range(len(rack) + 1):
        candidate = list(rack[:slot]) + [new] + list(rack[slot:])
        idx = [order_index[s] for s in candidate]
        if idx == sorted(idx):
            valid.append(slot)
    assert len(valid) == 1, f"expected exactly one valid slot, got {valid}"
    slot = valid[0]
    left, right = slot, len(rack) - slot
    if left <= right:
        return "left", slot + 1, left
    return "right", len(rack) + 1 - slot, right


def rect_outline_distance(point, corners):
    """Distance from a point to the quad outline (min over edge segments)."""
    p = np.asarray(point, dtype=float)
    best = math.inf
    for i in range(4):
        a = np.asarray(corners[i], dtype=float)
        b = np.asarray(corners[(i + 1) % 4], dtype=float)
        d = b - a
        t = np.clip(np.dot(p - a, d) / np.dot(d, d), 0.0, 1.0)
        best = min(best, float(np.linalg.norm(p - (a + t * d))))
    return best


def outline_distances(points, corners):
    """Vectorized distance from each point to the quad outline."""
    pts = np.asarray(points, dtype=float)
    best = np.full(len(pts), math.inf)
    for i in range(4):
        a = np.asarray(corners[i], dtype=float)
        b = np.asarray(corners[(i + 1) % 4], dtype=float)
        d = b - a
        t = np.clip((pts - a) @ d / float(d @ d), 0.0, 1.0)
        closest = a + t[:, None] * d
        best = np.minimum(best, np.linalg.norm(pts - closest, axis=1))
    return best


def grid_search_rect_pose(points, dims, true_pose, tol, xy_window=0.06,
                          ang_window_deg=3.0, xy_step=0.01, ang_step_deg=0.5):
    """Exhaustive local pose search maximizing outline inliers.

    ``true_pose`` is (front_center_xy, heading); the search covers a window
    around it at the given steps and returns (best corners, best count).
    """
    from guidesim.geometry import RectBoundary

    pts = np.asarray(points, dtype=float)
    (cx, cy), heading = true_pose
    best_count, best_corners = -1, None
    xs = np.arange(cx - xy_window, cx + xy_window + 1e-9, xy_step)
    ys = np.arange(cy - xy_window, cy + xy_window + 1e-9, xy_step)
    angs = np.radians(np.arange(-ang_window_deg, ang_window_deg + 1e-9, ang_step_deg))
    for x in xs:
        for y in ys:
            for da in angs:
                rect = RectBoundary.from_pose((x, y), heading + da, dims)
                count = int((outline_distances(pts, rect.corners) <= tol).sum())
                if count > best_count:
                    best_count, best_corners = count, rect.corners
    return best_corners, best_count


def segment_dominant_oracle(img, hue_bins=18, light_bins=8, sat_bins=8):
    """Per-pixel reimplementation of the sequential histogram segmentation."""
    import colorsys

    from scipy.ndimage import label as cc_label
    from scipy.ndimage import uniform_filter

    arr = np.asarray(img, dtype=float)
    blurred = uniform_filter(arr, size=(3, 3, 1), mode="nearest")
    h, w = arr.shape[:2]
    hue = np.zeros((h, w))
    light = np.zeros((h, w))
    sat = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            r, g, b = blurred[y, x] / 255.0
            hh, ll, ss = colorsys.rgb_to_hls(r, g, b)
            hue[y, x], light[y, x], sat[y, x] = hh * 360.0, ll, ss

    def pick(values, bins, upper, mask):
        idx = np.minimum((values / upper * bins).astype(int), bins - 1)
        counts = np.bincount(idx[mask].ravel(), minlength=bins)
        return mask & (idx == int(np.argmax(counts)))

    mask = np.ones((h, w), dtype=bool)
    mask = pick(hue, hue_bins, 360.0, mask)
    mask = pick(light, light_bins, 1.0 + 1e-12, mask)
    mask = pick(sat, sat_bins, 1.0 + 1e-12, mask)
    labels, n = cc_label(mask, structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]]))
    if n == 0:
        return np.zeros((h, w), dtype=bool)
    sizes = np.bincount(labels.ravel())[1:]
    return labels == int(np.argmax(sizes)) + 1


def knn_mean_distances(points, k):
    """Brute-force mean distance of each point to its k nearest others."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    out = np.zeros(n)
    for i in range(n):
        d = np.linalg.norm(pts - pts[i], axis=1)
        d = np.sort(d)[1:k + 1]
        out[i] = d.mean()
    return out
