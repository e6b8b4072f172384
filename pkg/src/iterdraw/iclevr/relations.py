"""Pairwise spatial relations from centroid comparisons.

The camera-free 2D convention: smaller x is further left, smaller y is
further from the viewer (behind). Exact ties on an axis are resample
triggers inside the generator, never emitted.
"""

from __future__ import annotations

from typing import NamedTuple

from ..core.types import ObjectSpec

LEFT = "left"
RIGHT = "right"
BEHIND = "behind"
FRONT = "front"


class CoordinateTie(ValueError):
    """Two centroids coincide on the deciding axis; caller must resample."""


class Relation(NamedTuple):
    horizontal: str  # LEFT or RIGHT
    depth: str       # BEHIND or FRONT


def derive_relations(new_obj: ObjectSpec, ref: ObjectSpec) -> Relation:
    """Relation of `new_obj` relative to `ref` on both axes."""
    if new_obj.x == ref.x:
        raise CoordinateTie(f"x tie at {new_obj.x}")
    if new_obj.y == ref.y:
        raise CoordinateTie(f"y tie at {new_obj.y}")
    horizontal = LEFT if new_obj.x < ref.x else RIGHT
    depth = BEHIND if new_obj.y < ref.y else FRONT
    return Relation(horizontal, depth)
