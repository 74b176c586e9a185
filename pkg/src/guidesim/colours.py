"""Shirt colour pipeline: dominant-region segmentation, classification, rack plan.

Colour space: hue, lightness, saturation from the standard hex-cone transform
of RGB. Brightness levels run 1 (darkest) to 3 (lightest).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import label as cc_label
from scipy.ndimage import uniform_filter

from .errors import AmbiguousColour, DuplicateShirt, EmptyMask

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass(frozen=True)
class ShirtClass:
    base: str
    brightness: int  # 1 darkest .. 3 lightest

    def __post_init__(self):
        if self.brightness not in (1, 2, 3):
            raise ValueError("brightness level must be 1, 2 or 3")

    def __str__(self) -> str:
        return f"{self.base}{self.brightness}"


def rgb_to_hls(rgb) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized hue (degrees, 0..360), lightness and saturation in [0, 1].

    Hue of achromatic pixels is 0 by convention.
    """
    arr = np.asarray(rgb, dtype=float) / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    light = (maxc + minc) / 2.0
    chroma = maxc - minc
    hue = np.zeros_like(light)
    mask = chroma > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        rc = np.where(mask, (maxc - r) / np.where(mask, chroma, 1.0), 0.0)
        gc = np.where(mask, (maxc - g) / np.where(mask, chroma, 1.0), 0.0)
        bc = np.where(mask, (maxc - b) / np.where(mask, chroma, 1.0), 0.0)
    hue = np.where(maxc == r, bc - gc,
                   np.where(maxc == g, 2.0 + rc - bc, 4.0 + gc - rc))
    hue = np.where(mask, (hue / 6.0) % 1.0, 0.0) * 360.0
    denom = 1.0 - np.abs(2.0 * light - 1.0)
    sat = np.where((chroma > 0) & (denom > 0), chroma / np.where(denom > 0, denom, 1.0), 0.0)
    return hue, light, sat


def circular_hue_distance(h1, h2) -> np.ndarray:
    d = np.abs(np.asarray(h1, dtype=float) - np.asarray(h2, dtype=float)) % 360.0
    return np.minimum(d, 360.0 - d)


def segment_dominant_region(img, hue_bins: int = 18, light_bins: int = 8,
                            sat_bins: int = 8, min_pixels: int = 20) -> np.ndarray:
    """Boolean mask of the largest single-coloured area in the image.

    Sequential masking after a 3x3 box blur: keep the most populated hue bin,
    within it the most populated lightness bin, then saturation bin, and
    finally the largest 4-connected component of the survivors (ties resolve
    to the component discovered first in row-major order). Raises EmptyMask
    when that component has fewer than ``min_pixels`` pixels.
    """
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("expected a non-empty (H, W, 3) RGB image")
    blurred = uniform_filter(arr, size=(3, 3, 1), mode="nearest")
    hue, light, sat = rgb_to_hls(blurred)

    def most_populated(values, bins, upper, mask):
        idx = np.minimum((values / upper * bins).astype(int), bins - 1)
        counts = np.bincount(idx[mask].ravel(), minlength=bins)
        best = int(np.argmax(counts))
        return mask & (idx == best)

    mask = np.ones(arr.shape[:2], dtype=bool)
    mask = most_populated(hue, hue_bins, 360.0, mask)
    mask = most_populated(light, light_bins, 1.0 + 1e-12, mask)
    mask = most_populated(sat, sat_bins, 1.0 + 1e-12, mask)

    labels, n = cc_label(mask, structure=_FOUR_CONN)
    if n == 0:
        raise EmptyMask("no pixels survived the histogram masks")
    sizes = np.bincount(labels.ravel())[1:]
    best = int(np.argmax(sizes)) + 1
    component = labels == best
    if component.sum() < min_pixels:
        raise EmptyMask(f"largest component has {int(component.sum())} pixels,"
                        f" below min_pixels={min_pixels}")
    return component


def classify_shirt(mask_mean_rgb, palette: dict, hue_margin_deg: float = 5.0) -> ShirtClass:
    """Nearest palette class of a mean RGB: base colour by circular hue
    distance, brightness by lightness distance within that colour.

    ``palette`` maps colour name -> {level: reference RGB} for levels 1..3.
    Raises AmbiguousColour when the two best base-colour hue distances differ
    by less than ``hue_margin_deg``.
    """
    mean = np.asarray(mask_mean_rgb, dtype=float)
    hue, light, _ = rgb_to_hls(mean.reshape(1, 1, 3))
    hue, light = float(hue[0, 0]), float(light[0, 0])

    colour_dist = {}
    for colour, levels in palette.items():
        refs = np.array([levels[k] for k in sorted(levels, key=int)], dtype=float)
        ref_hue, _, _ = rgb_to_hls(refs.reshape(1, -1, 3))
        colour_dist[colour] = float(np.min(circular_hue_distance(hue, ref_hue)))
    ranked = sorted(colour_dist.items(), key=lambda kv: kv[1])
    if len(ranked) > 1 and ranked[1][1] - ranked[0][1] < hue_margin_deg:
        raise AmbiguousColour(
            f"hue {hue:.1f} deg sits between {ranked[0][0]} and {ranked[1][0]}")
    base = ranked[0][0]

    best_level, best_err = None, math.inf
    for level_key, ref in palette[base].items():
        _, ref_light, _ = rgb_to_hls(np.asarray(ref, dtype=float).reshape(1, 1, 3))
        err = abs(light - float(ref_light[0, 0]))
        if err < best_err:
            best_level, best_err = int(level_key), err
    return ShirtClass(base, best_level)


@dataclass(frozen=True)
class Instruction:
    """Placement instruction: slot position counted from the given side."""

    side: str       # "left" or "right"
    position: int   # 1-based from the chosen side

    def __str__(self) -> str:
        return f"{self.side} | {self.position}"


def insertion_plan(rack, new: ShirtClass, total_order) -> tuple[Instruction, tuple, int]:
    """Slot for the next shirt that keeps the rack sorted, minimizing shifts.

    ``rack`` is the left-to-right sequence already hung; ``total_order`` the
    full sorted sequence of all shirts. Returns the instruction, the new rack
    and the number of existing hangers that must shift: hangers left of the
    slot for a left insertion, right of it for a right insertion, whichever
    side is cheaper (ties go left). The position is counted from that side.
    """
    order_index = {s: i for i, s in enumerate(total_order)}
    rack = tuple(rack)
    if new not in order_index:
        raise ValueError(f"{new} does not appear in the total order")
    if new in rack:
        raise DuplicateShirt(f"{new} is already on the rack")
    idx = [order_index[s] for s in rack]
    if sorted(idx) != idx or len(set(idx)) != len(idx):
        raise ValueError("rack is not a sorted subsequence of the total order")

    slot = sum(1 for i in idx if i < order_index[new])
    left_moves = slot
    right_moves = len(rack) - slot
    if left_moves <= right_moves:
        instruction = Instruction("left", slot + 1)
        moves = left_moves
    else:
        instruction = Instruction("right", len(rack) + 1 - slot)
        moves = right_moves
    new_rack = rack[:slot] + (new,) + rack[slot:]
    return instruction, new_rack, moves
