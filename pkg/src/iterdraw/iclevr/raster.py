"""Deterministic 2D rasterizer: flat-color glyphs over a dark background.

Depth is encoded vertically; objects are composited with the painter's
algorithm (ascending y, so nearer objects overwrite farther ones).
"""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from ..core.types import ImageGrid, ObjectSpec, pixels_to_floats
from .config import BACKGROUND_RGB, PALETTE, GenConfig


def _glyph_mask(shape: str, cx: float, cy: float, half: int,
                side: int) -> np.ndarray:
    ys, xs = np.mgrid[0:side, 0:side]
    dx = xs + 0.5 - cx
    dy = ys + 0.5 - cy
    if shape == "cube":
        return (np.abs(dx) <= half) & (np.abs(dy) <= half)
    if shape == "sphere":
        return dx * dx + dy * dy <= half * half
    if shape == "cylinder":
        w = 0.72 * half
        body = (np.abs(dx) <= w) & (dy >= -half) & (dy <= half)
        cap = (dx / w) ** 2 + ((dy + half) / (0.45 * half)) ** 2 <= 1.0
        return body | cap
    raise ValueError(f"unknown shape {shape!r}")


def rasterize_scene(scene: Sequence[ObjectSpec], config: GenConfig) -> ImageGrid:
    side = config.canvas_side
    pixels = np.empty((side, side, 3), dtype=np.uint8)
    pixels[:] = np.asarray(BACKGROUND_RGB, dtype=np.uint8)
    # Painter's algorithm: draw far (small y) first so near objects occlude.
    ordered = sorted(scene, key=lambda o: (o.y, o.x, o.class_id))
    for obj in ordered:
        if obj.color is None or obj.color not in PALETTE:
            raise ValueError(f"object color {obj.color!r} has no RGB value")
        mask = _glyph_mask(obj.shape, obj.x, obj.y, config.glyph_half, side)
        pixels[mask] = np.asarray(PALETTE[obj.color], dtype=np.uint8)
    return ImageGrid(pixels_to_floats(pixels))


def background_image(config: GenConfig) -> ImageGrid:
    return rasterize_scene((), config)


def glyph_color_float(color: str) -> Tuple[float, float, float]:
    r, g, b = PALETTE[color]
    return tuple(v / 127.5 - 1.0 for v in (r, g, b))
