import math

import numpy as np
import pytest

from guidesim.errors import LethalGoal, LethalStart, NoPath, OutOfBounds
from guidesim.geometry import Pose2D, RectBoundary
from guidesim.mapping import OccupancyGrid
from guidesim.planning import (Path, PlannerParams, compute_goal, desired_heading,
                               path_to_csv, plan)

import oracles


def empty_map(w=20, h=20, res=0.1):
    return OccupancyGrid.blank((0, 0), res, w, h)


# ------------------------------------------------------------------- goal

def test_goal_axis_aligned_example():
    rect = RectBoundary(np.array([[0, 0], [2, 0], [2, 6], [0, 6]]), (6, 2))
    assert np.allclose(compute_goal(rect), [1.0, 7.0])


def test_goal_rotation_equivariance():
    rect = RectBoundary(np.array([[0, 0], [2, 0], [2, 6], [0, 6]]), (6, 2))
    angle = math.pi / 2
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    rotated = RectBoundary(rect.corners @ rot.T, rect.dims)
    assert np.allclose(compute_goal(rotated), rot @ compute_goal(rect), atol=1e-12)


def test_goal_translation_equivariance():
    rect = RectBoundary(np.array([[0, 0], [2, 0], [2, 6], [0, 6]]), (6, 2))
    moved = RectBoundary(rect.corners + np.array([5.0, 5.0]), rect.dims)
    assert np.allclose(compute_goal(moved), compute_goal(rect) + [5, 5])


# ------------------------------------------------------------------- plan

def test_straight_path_on_empty_map():
    cm = empty_map()
    p = plan(cm, (0.05, 0.05), (0.05, 1.05))
    assert p.cost == pytest.approx(10 * 0.1)
    assert len(p) == 11
    xs = p.waypoints[:, 0]
    assert np.allclose(xs, xs[0])


def test_start_equals_goal():
    cm = empty_map()
    p = plan(cm, (0.55, 0.55), (0.55, 0.55))
    assert len(p) == 1
    assert p.cost == 0.0


def test_error_kinds_are_distinct():
    cm = empty_map()
    with pytest.raises(OutOfBounds):
        plan(cm, (-1.0, 0.0), (0.5, 0.5))
    with pytest.raises(OutOfBounds):
        plan(cm, (0.5, 0.5), (50.0, 0.5))
    cm.cells[0, 0] = 255
    with pytest.raises(LethalStart):
        plan(cm, (0.05, 0.05), (0.5, 0.5))
    with pytest.raises(LethalGoal):
        plan(cm, (0.5, 0.5), (0.05, 0.05))


def test_no_path_when_walled_off():
    cm = empty_map()
    cm.cells[10, :] = 255
    with pytest.raises(NoPath):
        plan(cm, (0.55, 0.55), (0.55, 1.55))


def test_matches_dijkstra_oracle_on_random_maps():
    rng = np.random.default_rng(17)
    for _ in range(25):
        cells = rng.integers(0, 256, size=(50, 50)).astype(np.uint8)
        cells[cells > 235] = 255
        cells[0, 0] = min(cells[0, 0], 200)
        cells[49, 49] = min(cells[49, 49], 200)
        cm = OccupancyGrid((0, 0), 0.1, cells)
        start, goal = (0.05, 0.05), (4.95, 4.95)
        oracle = oracles.dijkstra_cost(cm, start, goal)
        try:
            p = plan(cm, start, goal)
            assert p.cost == oracle
        except NoPath:
            assert not np.isfinite(oracle)


def test_path_avoids_lethal_cells():
    rng = np.random.default_rng(23)
    cells = rng.integers(0, 256, size=(30, 30)).astype(np.uint8)
    cells[cells > 230] = 255
    cells[0, 0] = 0
    cells[29, 29] = 0
    cm = OccupancyGrid((0, 0), 0.1, cells)
    p = plan(cm, (0.05, 0.05), (2.95, 2.95))
    for ix, iy in p.cells:
        assert cm.cells[iy, ix] < 254
    # consecutive waypoints 8-adjacent
    steps = np.abs(np.diff(p.cells, axis=0))
    assert steps.max() <= 1


def test_tie_breaking_is_deterministic():
    cells = np.zeros((15, 15), np.uint8)
    cm = OccupancyGrid((0, 0), 0.1, cells)
    p1 = plan(cm, (0.05, 0.05), (1.45, 1.05))
    p2 = plan(cm, (0.05, 0.05), (1.45, 1.05))
    assert (p1.waypoints == p2.waypoints).all()
    assert p1.cost == p2.cost


# --------------------------------------------------------------- lookahead

def test_desired_heading_straight_path():
    cm = empty_map()
    p = plan(cm, (0.05, 0.05), (0.05, 1.55))
    pose = Pose2D(0.05, 0.05, 0.0)
    assert desired_heading(p, pose, 0.5) == pytest.approx(math.pi / 2)


def test_desired_heading_clamps_to_final_point():
    wp = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    p = Path(wp, 2.0)
    pose = Pose2D(1.9, -0.1, 0.0)
    h = desired_heading(p, pose, 5.0)
    assert h == pytest.approx(math.atan2(0.1, 0.1))


def test_desired_heading_l_shape_matches_arc_walk_oracle():
    wp = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 0.5], [1.0, 1.0]])
    p = Path(wp, 2.0)
    for pos, look in [((0.1, 0.05), 0.4), ((0.5, 0.0), 0.3), ((0.9, 0.1), 1.0)]:
        pose = Pose2D(pos[0], pos[1], 0.0)
        assert desired_heading(p, pose, look) == pytest.approx(
            oracles.arc_walk_heading(wp, pos, look))


def test_path_csv_dump():
    p = Path(np.array([[0.0, 0.5], [1.25, -0.5]]), 1.0)
    assert path_to_csv(p) == "0.000000,0.500000\n1.250000,-0.500000\n"


def test_weighted_astar_allows_heavier_heuristic():
    rng = np.random.default_rng(31)
    cells = rng.integers(0, 200, size=(30, 30)).astype(np.uint8)
    cm = OccupancyGrid((0, 0), 0.1, cells)
    optimal = plan(cm, (0.05, 0.05), (2.95, 2.95), PlannerParams(heuristic_weight=1.0))
    greedy = plan(cm, (0.05, 0.05), (2.95, 2.95), PlannerParams(heuristic_weight=2.5))
    assert greedy.cost >= optimal.cost
