import math

import numpy as np
import pytest

from guidesim.geometry import RectBoundary
from guidesim.mapping import (OccupancyGrid, course_costmap, crop_to_boundary,
                              grid_from_text, grid_to_text, inflate,
                              integrate_points)

import oracles


def make_grid(w=20, h=16, res=0.05, origin=(0.0, 0.0)):
    return OccupancyGrid.blank(origin, res, w, h)


def test_integrate_empty_list_is_identity():
    grid = make_grid()
    out = integrate_points(grid, [])
    assert (out.cells == grid.cells).all()


def test_integrate_single_point_marks_exactly_its_cell():
    grid = make_grid()
    out = integrate_points(grid, [[0.125, 0.075]])  # center of cell (2, 1)
    assert out.cells[1, 2] == 255
    assert out.cells.sum() == 255


def test_integrate_matches_floor_division_oracle():
    rng = np.random.default_rng(3)
    grid = make_grid(w=40, h=40)
    # points on a disc outline
    ang = rng.uniform(0, 2 * math.pi, 10_000)
    pts = np.column_stack([1.0 + 0.6 * np.cos(ang), 1.0 + 0.6 * np.sin(ang)])
    out = integrate_points(grid, pts)
    expect = np.zeros_like(grid.cells)
    for x, y in pts:
        ix = math.floor(x / grid.resolution)
        iy = math.floor(y / grid.resolution)
        if 0 <= ix < grid.width and 0 <= iy < grid.height:
            expect[iy, ix] = 255
    assert (out.cells == expect).all()


def test_integrate_ignores_out_of_bounds_points():
    grid = make_grid()
    out = integrate_points(grid, [[-1.0, 0.0], [100.0, 100.0]])
    assert out.cells.sum() == 0


def test_integrate_idempotent_and_monotone():
    rng = np.random.default_rng(11)
    grid = make_grid()
    pts = rng.uniform(0, 0.9, size=(50, 2))
    once = integrate_points(grid, pts)
    twice = integrate_points(once, pts)
    assert (once.cells == twice.cells).all()
    more = integrate_points(once, rng.uniform(0, 0.9, size=(20, 2)))
    assert (more.cells.astype(int) >= once.cells.astype(int)).all()


def test_crop_whole_grid_identity():
    grid = integrate_points(make_grid(), [[0.3, 0.3], [0.7, 0.2]])
    rect = RectBoundary(np.array([[-1, -1], [2, -1], [2, 2], [-1, 2]]), (3, 3))
    out = crop_to_boundary(grid, rect)
    assert (out.cells == grid.cells).all()


def test_crop_clears_cell_outside_edge():
    grid = integrate_points(make_grid(), [[0.925, 0.375]])
    # boundary ends at x = 0.8; the occupied cell sits ~0.1 m outside
    rect = RectBoundary(np.array([[0, 0], [0.8, 0], [0.8, 0.8], [0, 0.8]]), (0.8, 0.8))
    out = crop_to_boundary(grid, rect)
    assert out.cells.sum() == 0


def test_crop_matches_half_plane_oracle_rotated_rect():
    rng = np.random.default_rng(5)
    grid = make_grid(w=40, h=40)
    pts = rng.uniform(0, 2.0, size=(300, 2))
    grid = integrate_points(grid, pts)
    rect = RectBoundary.from_pose((0.4, 0.3), math.radians(35), (1.4, 0.9))
    out = crop_to_boundary(grid, rect)
    centers = grid.cell_centers()
    for iy in range(grid.height):
        for ix in range(grid.width):
            inside = oracles.point_in_ccw_quad(centers[iy, ix], rect.corners)
            expect = grid.cells[iy, ix] if inside else 0
            assert out.cells[iy, ix] == expect


def test_inflate_all_free():
    out = inflate(make_grid(), 0.2)
    assert out.cells.sum() == 0


def test_inflate_single_cell_radius_two_cells_is_l2_disc():
    grid = make_grid(w=11, h=11, res=0.1)
    grid.cells[5, 5] = 255
    out = inflate(grid, robot_radius=0.2, decay_width=0.0)
    expect = oracles.brute_force_inflate(grid.cells, 0.1, 0.2, 0.0)
    assert (out.cells == expect).all()
    # the 254 set is exactly the L2 disc of radius 2 cells, minus the center
    disc = {(dx, dy) for dx in range(-2, 3) for dy in range(-2, 3)
            if 0 < math.hypot(dx, dy) <= 2}
    marked = {(ix - 5, iy - 5) for iy, ix in zip(*np.where(out.cells == 254))}
    assert marked == disc


def test_inflate_matches_brute_force_with_decay():
    rng = np.random.default_rng(9)
    grid = make_grid(w=25, h=18, res=0.05)
    occ = rng.integers(0, 25 * 18, size=14)
    grid.cells.ravel()[occ] = 255
    out = inflate(grid, robot_radius=0.12, decay_width=0.2)
    expect = oracles.brute_force_inflate(grid.cells, 0.05, 0.12, 0.2)
    assert (out.cells == expect).all()


def test_inflate_is_max_of_individual_obstacles():
    grid = make_grid(w=30, h=12, res=0.05)
    grid.cells[5, 6] = 255
    grid.cells[6, 20] = 255
    both = inflate(grid, 0.15, 0.25)
    g1 = make_grid(w=30, h=12, res=0.05)
    g1.cells[5, 6] = 255
    g2 = make_grid(w=30, h=12, res=0.05)
    g2.cells[6, 20] = 255
    merged = np.maximum(inflate(g1, 0.15, 0.25).cells, inflate(g2, 0.15, 0.25).cells)
    assert (both.cells == merged).all()


def test_inflate_order_independent():
    rng = np.random.default_rng(21)
    pts = rng.uniform(0, 0.9, size=(40, 2))
    g1 = inflate(integrate_points(make_grid(), pts), 0.1, 0.2)
    g2 = inflate(integrate_points(make_grid(), pts[::-1]), 0.1, 0.2)
    assert (g1.cells == g2.cells).all()


def test_grid_text_round_trip_and_golden_header():
    grid = make_grid(w=3, h=2, res=0.25, origin=(1.5, -2.0))
    grid.cells[:] = [[0, 128, 255], [254, 1, 0]]
    text = grid_to_text(grid)
    assert text.splitlines()[0] == "3 2 0.25 1.5 -2"
    assert text == "3 2 0.25 1.5 -2\n0 128 255\n254 1 0\n"
    back = grid_from_text(text)
    assert back.resolution == grid.resolution
    assert back.origin == grid.origin
    assert (back.cells == grid.cells).all()


def test_course_costmap_blocks_outside_and_keeps_goal_strip():
    rect = RectBoundary.from_pose((1.0, 0.5), 0.0, (3.0, 1.5))
    grid = OccupancyGrid.from_bounds(-0.5, -2.0, 6.0, 3.0, 0.1)
    cm = course_costmap(grid, rect, robot_radius=0.2, decay_width=0.0)
    from guidesim.planning import compute_goal
    goal = compute_goal(rect)
    (gx, gy), = cm.world_to_cell([goal])
    assert cm.cells[gy, gx] < 254
    # a point well left of the course is lethal
    outside = rect.front_center + 1.2 * rect.left_dir + 1.0 * rect.travel_dir
    (ox, oy), = cm.world_to_cell([outside])
    assert cm.cells[oy, ox] >= 254


def test_resolution_must_be_positive():
    with pytest.raises(ValueError):
        OccupancyGrid((0, 0), 0.0, np.zeros((2, 2), np.uint8))
