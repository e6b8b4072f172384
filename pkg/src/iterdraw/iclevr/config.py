"""Generator configuration and the canonical shape/color class space."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

from ..core.catalog import ClassCatalog, ClassEntry

SHAPES = ("cube", "sphere", "cylinder")

# Eight canonical colors with flat RGB fills for the rasterizer.
PALETTE: Dict[str, Tuple[int, int, int]] = {
    "cyan": (41, 208, 208),
    "red": (173, 35, 35),
    "purple": (129, 38, 192),
    "yellow": (255, 238, 51),
    "blue": (42, 75, 215),
    "green": (29, 105, 20),
    "gray": (150, 150, 150),
    "brown": (129, 74, 25),
}

COLORS = tuple(PALETTE)

BACKGROUND_RGB = (20, 20, 20)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    """Knobs for procedural sequence synthesis.

    Split sizes default to the full-scale 6000/2000/2000 and are scaled
    down with `with_scale` for desk runs.
    """

    canvas_side: int = 128
    min_distance: float = 20.0
    margin: float = 12.0
    shapes: Tuple[str, ...] = SHAPES
    colors: Tuple[str, ...] = COLORS
    turns_per_sequence: int = 5
    split_sizes: Tuple[int, int, int] = (6000, 2000, 2000)
    seed: int = 0

    def __post_init__(self):
        if len(self.shapes) * len(self.colors) < self.turns_per_sequence:
            raise ConfigError(
                f"{len(self.shapes)} shapes x {len(self.colors)} colors cannot "
                f"fill {self.turns_per_sequence} distinct turns")
        if self.min_distance < 1:
            raise ConfigError("min_distance must be >= 1")
        if self.margin < 0:
            raise ConfigError("margin must be >= 0")
        if self.canvas_side - 2 * self.margin <= 0:
            raise ConfigError("margins leave no usable canvas")
        unknown = [c for c in self.colors if c not in PALETTE]
        if unknown:
            raise ConfigError(f"colors without RGB values: {unknown}")

    def with_scale(self, scale: float) -> "GenConfig":
        sizes = tuple(max(0, round(s * scale)) for s in self.split_sizes)
        return GenConfig(canvas_side=self.canvas_side,
                         min_distance=self.min_distance, margin=self.margin,
                         shapes=self.shapes, colors=self.colors,
                         turns_per_sequence=self.turns_per_sequence,
                         split_sizes=sizes, seed=self.seed)

    @property
    def glyph_half(self) -> int:
        """Fixed glyph half-extent in pixels, scaled with the canvas."""
        return max(2, round(self.canvas_side * 0.085))


def build_catalog(config: GenConfig) -> ClassCatalog:
    """Bijection (color, shape) -> class id, enumerated color-major."""
    entries = []
    for ci, color in enumerate(config.colors):
        for si, shape in enumerate(config.shapes):
            entries.append(ClassEntry(class_id=ci * len(config.shapes) + si,
                                      shape=shape, color=color))
    return ClassCatalog(kind="iclevr", canvas_side=config.canvas_side,
                        classes=tuple(entries),
                        turns_per_sequence=config.turns_per_sequence)
