import math

import numpy as np
import pytest

from guidesim.boundary import RansacParams, detect_boundary, fit_ground_plane
from guidesim.errors import BoundaryNotFound, DegenerateInput
from guidesim.geometry import RectBoundary

import oracles


def sample_outline(rect, n, sigma, outlier_fraction, rng,
                   edges=("front", "back", "left", "right")):
    segs = {e: rect.edge(e) for e in edges}
    lens = np.array([np.linalg.norm(b - a) for a, b in segs.values()])
    weights = lens / lens.sum()
    pts = []
    for _ in range(n):
        if rng.random() < outlier_fraction:
            a = rng.uniform(0, rect.dims[0])
            b = rng.uniform(-rect.dims[1] / 2, rect.dims[1] / 2)
            pts.append(rect.front_center + a * rect.travel_dir + b * rect.left_dir)
        else:
            k = rng.choice(len(edges), p=weights)
            p0, p1 = segs[edges[k]]
            pts.append(p0 + rng.uniform(0, 1) * (p1 - p0) + rng.normal(0, sigma, 2))
    return np.array(pts)


def corner_rms(detected, truth):
    """RMS corner error, minimized over the 180-degree labeling ambiguity."""
    e1 = math.sqrt(np.mean(np.sum((detected.corners - truth.corners) ** 2, axis=1)))
    e2 = math.sqrt(np.mean(np.sum((detected.flipped().corners - truth.corners) ** 2, axis=1)))
    return min(e1, e2)


# ------------------------------------------------------------------- planes

def test_plane_z0():
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(-1, 1, 50), rng.uniform(-1, 1, 50), np.zeros(50)])
    plane, rms = fit_ground_plane(pts)
    assert np.allclose(plane.normal, [0, 0, 1])
    assert plane.offset == pytest.approx(0.0, abs=1e-12)
    assert rms == pytest.approx(0.0, abs=1e-12)


def test_plane_offset_recovered_under_noise():
    rng = np.random.default_rng(1)
    pts = np.column_stack([rng.uniform(-1, 1, 400), rng.uniform(-1, 1, 400),
                           0.5 + rng.normal(0, 0.01, 400)])
    plane, rms = fit_ground_plane(pts)
    # SVD oracle on the covariance gives the same subspace
    centered = pts - pts.mean(axis=0)
    w, v = np.linalg.eigh(centered.T @ centered)
    n_oracle = v[:, 0] if v[2, 0] > 0 else -v[:, 0]
    assert abs(float(plane.normal @ n_oracle)) > 1 - 1e-9
    assert 0.49 <= plane.offset <= 0.51
    assert rms == pytest.approx(0.01, rel=0.2)


def test_plane_three_exact_points_cross_product_oracle():
    p0, p1, p2 = np.array([[0.0, 0, 0.2], [1, 0, 0.5], [0, 1, 0.9]])
    plane, rms = fit_ground_plane([p0, p1, p2])
    n = np.cross(p1 - p0, p2 - p0)
    n = n / np.linalg.norm(n)
    if n[2] < 0:
        n = -n
    assert np.allclose(plane.normal, n, atol=1e-9)
    assert plane.offset == pytest.approx(float(n @ p0), abs=1e-9)
    assert rms < 1e-9


def test_plane_collinear_degenerate():
    t = np.linspace(0, 1, 20)
    pts = np.column_stack([t, 2 * t, 3 * t])
    with pytest.raises(DegenerateInput):
        fit_ground_plane(pts)


def test_plane_needs_three_points():
    with pytest.raises(DegenerateInput):
        fit_ground_plane([[0, 0, 0], [1, 1, 1]])


# ---------------------------------------------------------------- rectangle

def test_noiseless_four_edges_recovered_exactly():
    rect = RectBoundary.from_pose((0.5, -1.0), math.radians(25), (6, 2))
    rng = np.random.default_rng(2)
    pts = sample_outline(rect, 400, 0.0, 0.0, rng)
    det = detect_boundary(pts, (6, 2), RansacParams(iterations=300, seed=7))
    assert corner_rms(det, rect) < 1e-6


def test_detected_rect_has_exact_dims_and_right_angles():
    rect = RectBoundary.from_pose((0, 0), 0.3, (6, 2))
    rng = np.random.default_rng(3)
    pts = sample_outline(rect, 500, 0.02, 0.1, rng)
    det = detect_boundary(pts, (6, 2), RansacParams(seed=1))
    sides = [np.linalg.norm(det.corners[(i + 1) % 4] - det.corners[i]) for i in range(4)]
    assert sides[0] == pytest.approx(2.0, abs=1e-9)
    assert sides[2] == pytest.approx(2.0, abs=1e-9)
    assert sides[1] == pytest.approx(6.0, abs=1e-9)
    assert sides[3] == pytest.approx(6.0, abs=1e-9)
    assert det.is_valid()


def test_noisy_fit_close_to_grid_search_oracle():
    rect = RectBoundary.from_pose((1.0, 2.0), math.radians(-40), (6, 2))
    rng = np.random.default_rng(4)
    pts = sample_outline(rect, 400, 0.02, 0.1, rng)
    det = detect_boundary(pts, (6, 2), RansacParams(seed=11))
    oracle_corners, oracle_count = oracles.grid_search_rect_pose(
        pts, (6, 2), ((1.0, 2.0), math.radians(-40)), tol=0.05)
    rms = corner_rms(det, rect)
    oracle_rms = min(
        math.sqrt(np.mean(np.sum((oracle_corners - rect.corners) ** 2, axis=1))),
        math.sqrt(np.mean(np.sum((oracle_corners[[2, 3, 0, 1]] - rect.corners) ** 2, axis=1))))
    assert rms < 0.05
    assert rms <= oracle_rms + 0.03


def test_three_edges_back_missing():
    rect = RectBoundary.from_pose((0, 0), math.radians(100), (6, 2))
    rng = np.random.default_rng(5)
    pts = sample_outline(rect, 500, 0.02, 0.1, rng, edges=("front", "left", "right"))
    det = detect_boundary(pts, (6, 2), RansacParams(seed=3))
    assert corner_rms(det, rect) < 0.08


def test_rigid_equivariance_same_seed():
    rect = RectBoundary.from_pose((0, 0), 0.0, (6, 2))
    rng = np.random.default_rng(6)
    pts = sample_outline(rect, 400, 0.02, 0.1, rng)
    det1 = detect_boundary(pts, (6, 2), RansacParams(seed=9))

    angle, shift = math.radians(73), np.array([4.0, -2.5])
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    det2 = detect_boundary(pts @ rot.T + shift, (6, 2), RansacParams(seed=9))
    moved = det1.corners @ rot.T + shift
    err = min(np.abs(det2.corners - moved).max(),
              np.abs(det2.flipped().corners - moved).max())
    assert err < 1e-6


def test_monotone_best_inlier_count():
    rect = RectBoundary.from_pose((0, 0), 0.1, (6, 2))
    rng = np.random.default_rng(7)
    pts = sample_outline(rect, 300, 0.02, 0.1, rng)
    det = detect_boundary(pts, (6, 2), RansacParams(iterations=400, seed=2))
    count = sum(oracles.rect_outline_distance(p, det.corners) <= 0.05 for p in pts)
    # fewer iterations can never validate a better hypothesis than more
    det_small = detect_boundary(pts, (6, 2), RansacParams(iterations=40, seed=2))
    count_small = sum(oracles.rect_outline_distance(p, det_small.corners) <= 0.05 for p in pts)
    assert count >= count_small


def test_not_found_reports_best_count():
    rng = np.random.default_rng(8)
    pts = rng.uniform(-3, 3, size=(120, 2))   # unstructured cloud
    with pytest.raises(BoundaryNotFound) as err:
        detect_boundary(pts, (6, 2), RansacParams(iterations=60, seed=1))
    assert err.value.best_inlier_count >= 0


def test_too_few_points():
    with pytest.raises(DegenerateInput):
        detect_boundary(np.array([[0.0, 0.0]]), (6, 2))
