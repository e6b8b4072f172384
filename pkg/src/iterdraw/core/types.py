"""Core domain types shared across the dataset, model, and evaluation code.

All types are immutable after construction and safe to share across threads.
Images live in memory as float arrays in [-1, 1] and on disk as 8-bit RGB.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

import numpy as np

# Distinguished scene-graph vertex for the image center.
CENTER = -1

# Directed spatial edge labels.
LEFT_OF = "left-of"
RIGHT_OF = "right-of"
IN_FRONT_OF = "in-front-of"
BEHIND = "behind"

EDGE_LABELS = (LEFT_OF, RIGHT_OF, IN_FRONT_OF, BEHIND)


class ValidationError(ValueError):
    """A domain invariant was violated while constructing or loading data."""

    def __init__(self, message: str, sequence_id: Optional[str] = None,
                 turn_index: Optional[int] = None):
        parts = []
        if sequence_id is not None:
            parts.append(f"sequence {sequence_id!r}")
        if turn_index is not None:
            parts.append(f"turn {turn_index}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.sequence_id = sequence_id
        self.turn_index = turn_index


def pixels_to_floats(pixels: np.ndarray) -> np.ndarray:
    """Map 8-bit RGB to floats in [-1, 1]: v = pixel / 127.5 - 1."""
    return (pixels.astype(np.float32) / 127.5) - 1.0


def floats_to_pixels(values: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pixels_to_floats`, rounding to the nearest 8-bit level."""
    scaled = np.rint((values + 1.0) * 127.5)
    return np.clip(scaled, 0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """An RGB image with float values in [-1, 1], shape (height, width, 3)."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 3 or v.shape[2] != 3:
            raise ValidationError(f"image must have shape (H, W, 3), got {v.shape}")
        if not np.isfinite(v).all():
            raise ValidationError("image contains non-finite values")
        if v.min() < -1.0 or v.max() > 1.0:
            raise ValidationError("image values must lie in [-1, 1]")
        if v.dtype != np.float32:
            object.__setattr__(self, "values", v.astype(np.float32))
        self.values.setflags(write=False)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_pixels(cls, pixels: np.ndarray) -> "ImageGrid":
        return cls(pixels_to_floats(pixels))

    def to_pixels(self) -> np.ndarray:
        return floats_to_pixels(self.values)

    @classmethod
    def uniform(cls, side: int, rgb: Tuple[int, int, int]) -> "ImageGrid":
        pixels = np.empty((side, side, 3), dtype=np.uint8)
        pixels[:] = np.asarray(rgb, dtype=np.uint8)
        return cls.from_pixels(pixels)


@dataclass(frozen=True)
class ObjectSpec:
    """One scene object: a class-catalog index plus attributes and position."""

    class_id: int
    shape: str
    color: Optional[str]
    centroid: Tuple[float, float]

    @property
    def x(self) -> float:
        return self.centroid[0]

    @property
    def y(self) -> float:
        return self.centroid[1]

    def validate(self, canvas_side: int) -> None:
        x, y = self.centroid
        if not (0 <= x < canvas_side and 0 <= y < canvas_side):
            raise ValidationError(
                f"centroid {self.centroid} outside canvas of side {canvas_side}")


@dataclass(frozen=True)
class Turn:
    """One instruction step: the text, the resulting scene state, and its image."""

    index: int
    instruction_tokens: Tuple[str, ...]
    scene: Tuple[ObjectSpec, ...]
    image: ImageGrid

    def __post_init__(self):
        if self.index < 1:
            raise ValidationError(f"turn index must be >= 1, got {self.index}")
        object.__setattr__(self, "instruction_tokens", tuple(self.instruction_tokens))
        object.__setattr__(self, "scene", tuple(self.scene))

    @property
    def instruction_text(self) -> str:
        return " ".join(self.instruction_tokens)


@dataclass(frozen=True)
class SceneSequence:
    """An ordered list of turns over a shared background canvas."""

    id: str
    turns: Tuple[Turn, ...]
    background: ImageGrid
    split: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "turns", tuple(self.turns))
        for expected, turn in enumerate(self.turns, start=1):
            if turn.index != expected:
                raise ValidationError(
                    f"turn indices must be 1..{len(self.turns)} in order",
                    sequence_id=self.id, turn_index=turn.index)


@dataclass(frozen=True)
class SceneGraph:
    """Spatial-relation graph: object class ids plus CENTER, with directed edges.

    Edges are (src, dst, label) with label one of EDGE_LABELS. left-of/right-of
    and in-front-of/behind are stored as mutual inverse pairs; exact coordinate
    ties on an axis produce no edge on that axis.
    """

    vertices: frozenset = field(default_factory=frozenset)
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "edges", frozenset(self.edges))
        for src, dst, label in self.edges:
            if label not in EDGE_LABELS:
                raise ValidationError(f"unknown edge label {label!r}")
            if src == dst:
                raise ValidationError("self-edges are not allowed")
            if src not in self.vertices or dst not in self.vertices:
                raise ValidationError("edge endpoints must be vertices")

    @property
    def object_vertices(self) -> frozenset:
        return self.vertices - {CENTER}


@dataclass(frozen=True)
class DetectionSet:
    """Per-class presence probabilities plus one regressed centroid per class.

    Centroids are recorded only for classes whose presence clears `threshold`.
    """

    presence: Mapping[int, float]
    centroids: Mapping[int, Tuple[float, float]]
    threshold: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "presence", dict(self.presence))
        object.__setattr__(self, "centroids", dict(self.centroids))
        extra = set(self.centroids) - set(self.presence)
        if extra:
            raise ValidationError(
                f"centroids recorded for classes without presence: {sorted(extra)}")

    def detected(self) -> frozenset:
        return frozenset(c for c, p in self.presence.items()
                         if p > self.threshold and c in self.centroids)
