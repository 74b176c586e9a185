"""Per-task pipelines: synthetic observations wired into the algorithm stack.

Each runner is a pure function of (scene, config, seed) and returns a
RunRecord. Device success means the algorithmic output matched the scene's
ground truth; pilot success additionally requires the simulated human
execution to go right (configurable error rates).
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass, field

import numpy as np

from . import belt, boundary, colours, mapping, seats, structuring, taskdata, touch, world
from .errors import (AmbiguousColour, BoundaryNotFound, DuplicateShirt, EmptyMask,
                     GuidesimError)
from .structuring import GridCell
from .world import Scene, TaskKind


@dataclass(frozen=True)
class RunRecord:
    task: str
    seed: int
    device_success: bool | None
    pilot_success: bool
    duration_s: float
    failure_reason: str = ""


@dataclass
class RunConfig:
    timeout_s: float = 480.0
    pilot_error_rate: float = 0.0
    # navigation
    resolution: float = 0.08
    plan_inflation: float = 0.35
    decay_width: float = 0.5
    depth_fov: float = 2 * math.pi
    depth_range: float = 5.0
    depth_rays: int = 720
    depth_noise_sigma: float = 0.01
    edge_noise_sigma: float = 0.02
    edge_outlier_fraction: float = 0.1
    edge_points: int = 500
    control_dt: float = 0.1
    behavior: world.BehaviorParams = field(default_factory=world.BehaviorParams)
    guidance: belt.GuidanceParams = field(default_factory=belt.GuidanceParams)
    # understanding
    ocr_error_rate: float = 0.05
    max_edit_distance: int = 2
    corner_noise_px: float = 1.5
    seat_leak_points: int = 12


def run_scenario(scene: Scene, config: RunConfig, seed: int) -> RunRecord:
    """Execute the task pipeline matching the scene's kind."""
    runners = {
        TaskKind.SIDEWALK: run_navigation,
        TaskKind.FOOTPATH: run_navigation,
        TaskKind.FOREST: run_navigation,
        TaskKind.DOORBELL: run_doorbell,
        TaskKind.SEATS: run_seats,
        TaskKind.GROCERY: run_grocery,
        TaskKind.COLOURS: run_colours,
        TaskKind.FINDER: run_finder,
        TaskKind.TOUCHSCREEN: run_touchscreen,
    }
    return runners[scene.task_kind](scene, config, seed)


def _rng(scene: Scene, seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([int(seed) & (2**63 - 1), int(scene.seed) & (2**63 - 1), salt]))


def _pilot_check(rng, config: RunConfig) -> bool:
    return bool(rng.random() >= config.pilot_error_rate)


def _record(scene, seed, device, pilot, duration, reason=""):
    return RunRecord(scene.task_kind.value, int(seed), device, pilot,
                     float(duration), reason)


# ---------------------------------------------------------------- navigation

def run_navigation(scene: Scene, config: RunConfig, seed: int) -> RunRecord:
    rng = _rng(scene, seed, 0)
    pilot = world.PilotState(scene.start_pose())
    rect_true = scene.boundary

    edge_pts = world.sample_edge_points(
        scene, ("front", "back", "left", "right"),
        config.edge_noise_sigma, config.edge_outlier_fraction,
        seed=int(rng.integers(2**63)), n_points=config.edge_points)
    try:
        params = boundary.RansacParams(seed=int(rng.integers(2**63)))
        rect = boundary.detect_boundary(edge_pts, scene.boundary_dims, params)
    except BoundaryNotFound as exc:
        return _record(scene, seed, False, False, 5.0, f"boundary: {exc}")
    rect = rect.oriented_toward(pilot.pose.heading)

    truth = mapping.inflate(world.rasterize_scene(scene, resolution=0.05),
                            world.PILOT_RADIUS, decay_width=0.0)
    xmin, ymin = rect.corners.min(axis=0) - 1.6
    xmax, ymax = rect.corners.max(axis=0) + 1.6
    grid = mapping.OccupancyGrid.from_bounds(xmin, ymin, xmax, ymax, config.resolution)
    guidance = belt.BeltGuidance(config.guidance)

    t = 0.0
    next_tick = 0.0
    collided = False
    left_course = False
    while t < config.timeout_s:
        emitted: belt.BeltCue | None = None
        if t >= next_tick - 1e-9:
            pts = world.sample_depth_points(
                scene, pilot.pose, config.depth_fov, config.depth_range,
                config.depth_noise_sigma, seed=int(rng.integers(2**63)),
                n_rays=config.depth_rays)
            grid = mapping.integrate_points(grid, pts)
            costmap = mapping.course_costmap(grid, rect, config.plan_inflation,
                                             config.decay_width)
            emitted = guidance.tick(costmap, rect, pilot.pose, t, pilot.distance_traveled)
            next_tick += guidance.params.period
        pilot = world.step_pilot(pilot, emitted, config.control_dt, config.behavior)
        t = pilot.time

        (ix, iy), = truth.world_to_cell([pilot.pose.xy])
        if (0 <= ix < truth.width and 0 <= iy < truth.height
                and truth.cells[iy, ix] >= mapping.LETHAL):
            collided = True
            break
        a, b = rect_true.to_local(pilot.pose.xy)[0]
        if abs(b) > rect_true.dims[1] / 2 + 0.2 and 0 <= a <= rect_true.dims[0]:
            left_course = True
            break
        if guidance.finished:
            break

    if collided:
        return _record(scene, seed, False, False, t, "collision")
    if left_course:
        return _record(scene, seed, False, False, t, "left course")
    if not guidance.finished:
        reason = f"timeout ({guidance.diagnostic})" if guidance.halted else "timeout"
        return _record(scene, seed, False, False, t, reason)
    pilot_ok = _pilot_check(rng, config)
    return _record(scene, seed, True, pilot_ok, t, "" if pilot_ok else "pilot: strayed")


# ------------------------------------------------------------- text helpers

def _mutate_word(word: str, rng, error_rate: float) -> str:
    """Single-character OCR substitution with the given probability."""
    if len(word) == 0 or rng.random() >= error_rate:
        return word
    pos = int(rng.integers(0, len(word)))
    alphabet = string.ascii_uppercase
    repl = alphabet[int(rng.integers(0, len(alphabet)))]
    return word[:pos] + repl + word[pos + 1:]


# ------------------------------------------------------------------ doorbell

def run_doorbell(scene: Scene, config: RunConfig, seed: int) -> RunRecord:
    rng = _rng(scene, seed, 1)
    p = scene.payload
    n_rows, n_cols = p["n_rows"], p["n_cols"]
    names, target = p["names"], p["target_name"]
    duration = 55.0 + float(rng.uniform(0.0, 20.0))

    # The table card naming the target, read first.
    matched = None
    for _ in range(2):
        card_word = _mutate_word(target, rng, config.ocr_error_rate)
        matched = structuring.match_name([card_word], list(taskdata.NAMES),
                                         config.max_edit_distance)
        if matched is not None:
            break
    if matched is None:
        return _record(scene, seed, False, False, duration, "no card match")
    target_name = matched[0]

    # Nameplate detections on a jittered, rotated grid.
    pitch_x, pitch_y = 150.0, 90.0
    angle = float(rng.uniform(-0.2, 0.2))
    offset = rng.uniform(300.0, 700.0, size=2)
    c, s = math.cos(angle), math.sin(angle)
    detections = []
    cell_of_detection = []
    for r in range(n_rows):
        for col in range(n_cols):
            base = np.array([col * pitch_x, r * pitch_y])
            base = np.array([c * base[0] - s * base[1], s * base[0] + c * base[1]]) + offset
            name = names[r * n_cols + col]
            jitter = rng.uniform(-8.0, 8.0, size=2)
            text = _mutate_word(name, rng, config.ocr_error_rate)
            detections.append(structuring.TextDetection(text, tuple(base + jitter), (70, 16)))
            cell_of_detection.append((r + 1, col + 1))
            if rng.random() < 0.3:   # occasional second word on the same plate
                extra = base + jitter + np.array([0.0, 20.0])
                detections.append(structuring.TextDetection("FAM", tuple(extra), (30, 14)))
                cell_of_detection.append((r + 1, col + 1))

    clusters = structuring.cluster_detections(detections, eps=45.0)
    if len(clusters) != n_rows * n_cols:
        return _record(scene, seed, False, False, duration,
                       f"expected {n_rows * n_cols} clusters, found {len(clusters)}")
    rectified = structuring.rectify_centers([cl.centroid for cl in clusters])
    cells = structuring.assign_rows_cols(rectified, n_rows, n_cols, seed=int(rng.integers(2**31)))

    best_cluster, best_d = None, None
    for k, cl in enumerate(clusters):
        for i in cl.indices:
            d = structuring.levenshtein(detections[i].text, target_name)
            if best_d is None or d < best_d:
                best_cluster, best_d = k, d
    if best_d is None or best_d > config.max_edit_distance:
        return _record(scene, seed, False, False, duration, "target not on nameplate")
    computed = cells[best_cluster]
    device = computed == GridCell(*p["target_cell"])
    if not device:
        return _record(scene, seed, False, False, duration,
                       f"cell {tuple(computed)} != {tuple(p['target_cell'])}")
    pilot_ok = _pilot_check(rng, config)
    return _record(scene, seed, True, pilot_ok, duration,
                   "" if pilot_ok else "pilot: wrong button")


# --------------------------------------------------------------------- seats

_SEAT_ROW_A = ((1.2, 1.7), (2.3, 2.8))      # travel-axis band per row
_SEAT_COL_B = ((0.25, 0.75), (-0.25, 0.25), (-0.75, -0.25))  # left to right


def synth_seat_points(scene: Scene, rng, leak_points: int = 12):
    """Labeled 3D points for a seats scene: chairs, occupants, leaks, clutter."""
    rect = scene.boundary
    occupied = {tuple(c) for c in scene.payload["occupied"]}
    pts, labs = [], []

    def to_world(a, b, z):
        xy = rect.front_center + a * rect.travel_dir + b * rect.left_dir
        return [xy[0], xy[1], z]

    for r, (a0, a1) in enumerate(_SEAT_ROW_A, start=1):
        for col, (b0, b1) in enumerate(_SEAT_COL_B, start=1):
            n = 140
            a = rng.uniform(a0, a1, size=n)
            b = rng.uniform(b0, b1, size=n)
            z = rng.uniform(0.42, 0.95, size=n)
            pts.extend(to_world(ai, bi, zi) for ai, bi, zi in zip(a, b, z))
            labs.extend([seats.CHAIR] * n)
            if (r, col) in occupied:
                # Occupant points sit inside the central half of the cell.
                cb = (b0 + b1) / 2
                cell_a = (1.2, 2.0) if r == 1 else (2.0, 2.8)
                ca = (cell_a[0] + cell_a[1]) / 2
                m = 120
                a = rng.uniform(ca - 0.17, ca + 0.17, size=m)
                b = rng.uniform(cb - 0.11, cb + 0.11, size=m)
                z = rng.uniform(0.5, 1.5, size=m)
                label = seats.PERSON if rng.random() < 0.7 else seats.BACKPACK
                pts.extend(to_world(ai, bi, zi) for ai, bi, zi in zip(a, b, z))
                labs.extend([label] * m)

    # Leak points: occupant-labeled but outside every central half.
    free = [(r, col) for r in (1, 2) for col in (1, 2, 3) if (r, col) not in occupied]
    for k in range(leak_points):
        r, col = free[int(rng.integers(0, len(free)))] if free else (1, 1)
        a0, a1 = _SEAT_ROW_A[r - 1]
        b0, b1 = _SEAT_COL_B[col - 1]
        cb = (b0 + b1) / 2
        side = 1.0 if rng.random() < 0.5 else -1.0
        b = cb + side * float(rng.uniform(0.16, 0.24))
        a = float(rng.uniform(a0, a1))
        pts.append(to_world(a, b, float(rng.uniform(0.5, 1.4))))
        labs.append(seats.PERSON)

    # Sparse mid-air clutter, isolated enough for the outlier filter.
    for _ in range(4):
        a = float(rng.uniform(0.2, 0.8))
        b = float(rng.uniform(-1.3, 1.3))
        pts.append(to_world(a, b, float(rng.uniform(1.0, 1.8))))
        labs.append(seats.CHAIR)
    return np.array(pts), np.array(labs)


def run_seats(scene: Scene, config: RunConfig, seed: int) -> RunRecord:
    rng = _rng(scene, seed, 2)
    duration = 24.0 + float(rng.uniform(0.0, 8.0))
    pts, labs = synth_seat_points(scene, rng, config.seat_leak_points)
    try:
        report = seats.analyze_seats(pts, labs, scene.boundary)
    except GuidesimError as exc:
        return _record(scene, seed, False, False, duration, f"seats: {exc}")
    occupied = {tuple(c) for c in scene.payload["occupied"]}
    truth_free = sorted(GridCell(r, c) for r in (1, 2) for c in (1, 2, 3)
                        if (r, c) not in occupied)
    device = report.free_cells == truth_free
    if not device:
        return _record(scene, seed, False, False, duration,
                       f"free {report.free_cells} != {truth_free}")
    pilot_ok = _pilot_check(rng, config)
    return _record(scene, seed, True, pilot_ok, duration,
                   "" if pilot_ok else "pilot: wrong seat")


# ------------------------------------------------------------------- grocery

def run_grocery(scene: Scene, config: RunConfig, seed: int) -> RunRecord:
    rng = _rng(scene, seed, 3)
    p = scene.payload
    duration = 65.0 + float(rng.uniform(0.0, 18.0))

    target_product = None
    for _ in range(2):   # a failed match asks for one new picture
        kws = sorted(taskdata.KEYWORDS[p["target"]])
        words = [_mutate_word(kws[int(i)], rng, config.ocr_error_rate)
                 for i in rng.choice(len(kws), size=min(2, len(kws)), replace=False)]
        target_product = structuring.match_keywords(words, taskdata.KEYWORDS,
                                                    config.max_edit_distance)
        if target_product is not None:
            break
    if target_product is None:
        return _record(scene, seed, False, False, duration, "no match")

    pitch_x, pitch_y = 180.0, 120.0
    boxes, box_words = [], []
    for r in range(4):
        for col in range(5):
            cx = col * pitch_x + float(rng.uniform(-30.0, 30.0)) + 200.0
            cy = r * pitch_y + float(rng.uniform(-20.0, 20.0)) + 150.0
            boxes.append(((cx, cy), (140.0, 100.0)))
            kws = sorted(taskdata.KEYWORDS[p["grid"][r][col]])
            box_words.append([_mutate_word(kw, rng, config.ocr_error_rate)
                              for kw in kws[:2]])
    cells = structuring.grocery_grid(boxes)

    found = None
    for i, words in enumerate(box_words):
        if structuring.match_keywords(words, taskdata.KEYWORDS,
                                      config.max_edit_distance) == target_product:
            found = i
            break
    if found is None:
        return _record(scene, seed, False, False, duration, "no match")
    device = cells[found] == GridCell(*p["target_cell"]) and target_product == p["target"]
    if not device:
        return _record(scene, seed, False, False, duration,
                       f"cell {tuple(cells[found])} != {tuple(p['target_cell'])}")
    pilot_ok = _pilot_check(rng, config)
    return _record(scene, seed, True, pilot_ok, duration,
                   "" if pilot_ok else "pilot: wrong box")


# ------------------------------------------------------------------- colours

def synth_shirt_image(rgb, rng, size: int = 60) -> np.ndarray:
    """Shirt block over a warm gray background, with mild per-pixel noise."""
    img = np.empty((size, size, 3), dtype=float)
    img[:] = (122.0, 116.0, 108.0)
    img += rng.uniform(-4.0, 4.0, size=img.shape)
    h0, h1 = int(size * 0.12), int(size * 0.95)
    w0, w1 = int(size * 0.15), int(size * 0.92)
    block = np.asarray(rgb, dtype=float) + rng.uniform(-6.0, 6.0,
                                                       size=(h1 - h0, w1 - w0, 3))
    img[h0:h1, w0:w1] = block
    return np.clip(img, 0, 255).astype(np.uint8)


def run_colours(scene: Scene, config: RunConfig, seed: int) -> RunRecord:
    rng = _rng(scene, seed, 4)
    p = scene.payload
    duration = 85.0 + float(rng.uniform(0.0, 18.0))
    palette = {c: {int(k): tuple(v) for k, v in levels.items()}
               for c, levels in p["palette"].items()}
    total_order = [colours.ShirtClass(c, int(l)) for c, l in p["order"]]

    rack: tuple = ()
    correct = True
    pilot_ok = True
    for c, lvl in p["arrival"]:
        true_class = colours.ShirtClass(c, int(lvl))
        img = synth_shirt_image(palette[c][int(lvl)], rng)
        try:
            mask = colours.segment_dominant_region(img)
            mean_rgb = np.asarray(img, dtype=float)[mask].mean(axis=0)
            cls = colours.classify_shirt(mean_rgb, palette)
            _, rack, _ = colours.insertion_plan(rack, cls, total_order)
        except (AmbiguousColour, DuplicateShirt, EmptyMask) as exc:
            return _record(scene, seed, False, False, duration, f"colours: {exc}")
        if cls != true_class:
            correct = False
        if not _pilot_check(rng, config):
            pilot_ok = False
    device = correct and list(rack) == total_order
    if not device:
        return _record(scene, seed, False, False, duration, "wrong sort order")
    return _record(scene, seed, True, pilot_ok, duration,
                   "" if pilot_ok else "pilot: wrong placement")


# -------------------------------------------------------------------- finder

def run_finder(scene: Scene, config: RunConfig, seed: int) -> RunRecord:
    rng = _rng(scene, seed, 5)
    p = scene.payload
    duration = 100.0 + float(rng.uniform(0.0, 25.0))
    detections = [(label, min(max(x + float(rng.uniform(-0.02, 0.02)), 0.0), 1.0))
                  for label, x in p["objects"]]
    try:
        side = structuring.finder_side(detections, p["target"])
    except GuidesimError as exc:
        return _record(scene, seed, False, False, duration, f"finder: {exc}")
    target_x = dict((l, x) for l, x in p["objects"])[p["target"]]
    truth_side = "left" if target_x < 0.5 else "right"
    if side != truth_side:
        return _record(scene, seed, False, False, duration, "wrong side")

    # Pointing sweep: start on the announced side, step until the proximity
    # signal reports the closest band.
    pointing = math.radians(50.0) if side == "left" else math.radians(-50.0)
    target_dir = p["target_dir"]
    found = False
    for _ in range(60):
        if structuring.finder_proximity(pointing, target_dir, levels=4) == 0:
            found = True
            break
        pointing += math.copysign(math.radians(4.0), target_dir - pointing)
    if not found:
        return _record(scene, seed, False, False, duration, "sweep did not converge")
    pilot_ok = _pilot_check(rng, config)
    return _record(scene, seed, True, pilot_ok, duration,
                   "" if pilot_ok else "pilot: picked wrong object")


# --------------------------------------------------------------- touchscreen

def run_touchscreen(scene: Scene, config: RunConfig, seed: int) -> RunRecord:
    rng = _rng(scene, seed, 6)
    p = scene.payload
    duration = 85.0 + float(rng.uniform(0.0, 20.0))
    grid_n = int(p["grid"])
    row, col = p["target_cell"]
    target_screen = ((col - 0.5) / grid_n, (row - 0.5) / grid_n)

    unit = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    quad = np.array([(100.0, 80.0), (1150.0, 95.0), (1120.0, 860.0), (130.0, 840.0)])
    quad = quad + rng.uniform(-15.0, 15.0, size=quad.shape)
    to_image = touch.homography_from_corners(unit, quad)
    detected = quad + rng.normal(0.0, config.corner_noise_px, size=quad.shape)
    to_screen = touch.homography_from_corners(detected, unit)

    target_img = touch.apply_homography(to_image, target_screen)
    target_rect = touch.apply_homography(to_screen, target_img + rng.normal(0.0, 1.0, 2))
    tol = 0.4 / grid_n
    guide = touch.TouchGuidance(target_rect, tol, tol)

    finger = np.array([0.93, 0.93])   # bottom-right corner of the screen
    step = tol
    t = 0.0
    selected = False
    for _ in range(400):
        finger_img = touch.apply_homography(to_image, finger)
        finger_rect = touch.apply_homography(to_screen, finger_img)
        cue = guide.step(finger_rect, t)
        t += guide.RATE_PERIOD
        if cue is None:
            continue
        if cue.direction is touch.Direction.SELECT:
            guide.confirm_selection()
            selected = True
            break
        moves = {
            touch.Direction.LEFT: (-step, 0.0),
            touch.Direction.RIGHT: (step, 0.0),
            touch.Direction.UP: (0.0, -step),
            touch.Direction.DOWN: (0.0, step),
        }
        finger = finger + np.asarray(moves[cue.direction])
    if not selected:
        return _record(scene, seed, False, False, duration, "guidance did not converge")

    cell_half = 0.5 / grid_n
    err = np.abs(finger - np.asarray(target_screen))
    device = bool((err <= cell_half).all())
    if not device:
        return _record(scene, seed, False, False, duration, "selected wrong item")
    pilot_ok = _pilot_check(rng, config)
    if pilot_ok:
        return _record(scene, seed, True, True, duration, "")
    # Finger slip while lifting to press: lands one cell off.
    return _record(scene, seed, True, False, duration, "pilot: finger slipped")
