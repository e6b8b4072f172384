"""Constrained scene sampling and whole-dataset synthesis."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from ..core.catalog import ClassCatalog
from ..core.datasets import write_dataset
from ..core.types import ObjectSpec, SceneSequence, Turn
from .config import GenConfig, build_catalog
from .instructions import parse_instruction, render_instruction
from .raster import background_image, rasterize_scene
from .relations import CoordinateTie, Relation, derive_relations

MAX_PLACEMENT_ATTEMPTS = 1000

SPLITS = ("train", "valid", "test")


class GenerationError(RuntimeError):
    pass


def _pick_attributes(config: GenConfig, rng: np.random.Generator
                     ) -> List[Tuple[str, str]]:
    pairs = [(shape, color) for color in config.colors for shape in config.shapes]
    idx = rng.choice(len(pairs), size=config.turns_per_sequence, replace=False)
    return [pairs[i] for i in idx]


def _place_object(placed: Sequence[ObjectSpec], config: GenConfig,
                  rng: np.random.Generator) -> Tuple[float, float]:
    low = config.margin
    high = config.canvas_side - config.margin
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        x = float(rng.uniform(low, high))
        y = float(rng.uniform(low, high))
        ok = True
        for other in placed:
            dx, dy = x - other.x, y - other.y
            if dx * dx + dy * dy < config.min_distance ** 2:
                ok = False
                break
            if x == other.x or y == other.y:  # tie: resample, never emit
                ok = False
                break
        if ok:
            return x, y
    raise GenerationError(
        f"could not place object after {MAX_PLACEMENT_ATTEMPTS} attempts "
        f"(min_distance={config.min_distance}, canvas={config.canvas_side})")


def sample_scene_sequence(config: GenConfig, rng: np.random.Generator,
                          seq_id: str = "seq", split: str = "train",
                          catalog: ClassCatalog | None = None) -> SceneSequence:
    """One sequence: the first object sits exactly at the canvas center,
    later ones are uniform subject to margin and min-distance constraints."""
    catalog = catalog or build_catalog(config)
    attrs = _pick_attributes(config, rng)
    center = config.canvas_side / 2.0

    objects: List[ObjectSpec] = []
    turns: List[Turn] = []
    for t in range(1, config.turns_per_sequence + 1):
        shape, color = attrs[t - 1]
        if t == 1:
            pos = (center, center)
        else:
            pos = _place_object(objects, config, rng)
        new_obj = ObjectSpec(class_id=catalog.class_id(shape, color),
                             shape=shape, color=color, centroid=pos)
        refs: List[Tuple[ObjectSpec, Relation]] = []
        if t >= 2:
            most_recent = objects[-1]
            refs.append((most_recent, derive_relations(new_obj, most_recent)))
        if t >= 3:
            other = objects[int(rng.integers(0, t - 2))]
            refs.append((other, derive_relations(new_obj, other)))
        instruction = render_instruction(t, new_obj, refs)
        objects.append(new_obj)
        turns.append(Turn(index=t,
                          instruction_tokens=tuple(instruction.split()),
                          scene=tuple(objects),
                          image=rasterize_scene(objects, config)))
    return SceneSequence(id=seq_id, turns=tuple(turns),
                         background=background_image(config), split=split)


def sequence_rng(seed: int, split_index: int, seq_index: int) -> np.random.Generator:
    """Per-sequence stream so generation order (or parallelism) cannot
    change the output."""
    return np.random.default_rng([seed, split_index, seq_index])


def generate_split(config: GenConfig, split: str) -> List[SceneSequence]:
    split_index = SPLITS.index(split)
    count = config.split_sizes[split_index]
    catalog = build_catalog(config)
    return [
        sample_scene_sequence(config, sequence_rng(config.seed, split_index, i),
                              seq_id=f"{split}_{i:05d}", split=split,
                              catalog=catalog)
        for i in range(count)
    ]


def generate_dataset(config: GenConfig, out_path) -> dict:
    """Synthesize all splits and write them through the canonical layout."""
    sequences: List[SceneSequence] = []
    for split in SPLITS:
        sequences.extend(generate_split(config, split))
    return write_dataset(sequences, out_path, build_catalog(config))


def verify_sequence(seq: SceneSequence, config: GenConfig) -> None:
    """Cross-check stored instructions against recomputed relations.

    Raises ValueError on the first inconsistency; used by tests and the
    dataset self-check.
    """
    seen: List[ObjectSpec] = []
    for turn in seq.turns:
        text = turn.instruction_text
        fields = parse_instruction(text, turn.index)
        new_obj = turn.scene[-1]
        if (fields["color"], fields["shape"]) != (new_obj.color, new_obj.shape):
            raise ValueError(f"{seq.id} turn {turn.index}: instruction names "
                             f"{fields['color']} {fields['shape']}, scene adds "
                             f"{new_obj.color} {new_obj.shape}")
        if turn.index == 1:
            center = config.canvas_side / 2.0
            if new_obj.centroid != (center, center):
                raise ValueError(f"{seq.id}: first object not at center")
        else:
            rel = derive_relations(new_obj, seen[-1])
            depth_word = "behind" if rel.depth == "behind" else "in front of"
            if fields["depth"] != depth_word or fields["side"] != rel.horizontal:
                raise ValueError(f"{seq.id} turn {turn.index}: relation words "
                                 f"disagree with centroids")
        if turn.index >= 3:
            ref2 = next(o for o in seen
                        if (o.color, o.shape) == (fields["color2"], fields["shape2"]))
            rel2 = derive_relations(new_obj, ref2)
            depth2 = "behind" if rel2.depth == "behind" else "in front of"
            if fields["depth2"] != depth2:
                raise ValueError(f"{seq.id} turn {turn.index}: second-referent "
                                 f"depth word disagrees with centroids")
        seen.append(new_obj)
