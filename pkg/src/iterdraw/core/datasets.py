"""Canonical on-disk dataset layout and the read/write round trip.

Layout::

    <root>/catalog.json
    <root>/index.jsonl            one JSON record per sequence
    <root>/images/<seq_id>/bg.png
    <root>/images/<seq_id>/turn<k>.png   (k from 1)

Index records carry the sequence id, split, per-turn instruction text,
object annotations, and relative image paths. Pixel values are 8-bit RGB
PNG on disk and floats in [-1, 1] in memory (v = pixel / 127.5 - 1).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
from PIL import Image

from .catalog import ClassCatalog
from .types import ImageGrid, ObjectSpec, SceneSequence, Turn, ValidationError

INDEX_NAME = "index.jsonl"
CATALOG_NAME = "catalog.json"
IMAGES_DIR = "images"


def save_png(image: ImageGrid, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(image.to_pixels(), mode="RGB").save(path, format="PNG")


def load_png(path: Path) -> ImageGrid:
    if not path.exists():
        raise FileNotFoundError(f"missing image file: {path}")
    with Image.open(path) as im:
        pixels = np.asarray(im.convert("RGB"))
    return ImageGrid.from_pixels(pixels)


def _object_record(obj: ObjectSpec) -> Dict:
    return {
        "class_id": obj.class_id,
        "shape": obj.shape,
        "color": obj.color,
        "x": obj.x,
        "y": obj.y,
    }


def _object_from_record(rec: Dict) -> ObjectSpec:
    return ObjectSpec(class_id=rec["class_id"], shape=rec["shape"],
                      color=rec.get("color"), centroid=(rec["x"], rec["y"]))


def write_dataset(dataset: Sequence[SceneSequence], path: Path,
                  catalog: ClassCatalog) -> Dict:
    """Write sequences and catalog under `path`; returns a manifest summary."""
    if not dataset:
        raise ValidationError("dataset must be non-empty")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)

    seen = set()
    for seq in dataset:
        if seq.id in seen:
            raise ValidationError("duplicate sequence id", sequence_id=seq.id)
        seen.add(seq.id)

    catalog.save(path / CATALOG_NAME)
    images_written = 0
    split_counts: Dict[str, int] = {}
    with open(path / INDEX_NAME, "w", encoding="utf-8") as index:
        for seq in dataset:
            rel_dir = f"{IMAGES_DIR}/{seq.id}"
            save_png(seq.background, path / rel_dir / "bg.png")
            images_written += 1
            turns = []
            for turn in seq.turns:
                rel_img = f"{rel_dir}/turn{turn.index}.png"
                save_png(turn.image, path / rel_img)
                images_written += 1
                turns.append({
                    "index": turn.index,
                    "text": turn.instruction_text,
                    "objects": [_object_record(o) for o in turn.scene],
                    "image": rel_img,
                })
            record = {
                "id": seq.id,
                "split": seq.split,
                "background": f"{rel_dir}/bg.png",
                "turns": turns,
            }
            index.write(json.dumps(record, sort_keys=True) + "\n")
            split_counts[seq.split] = split_counts.get(seq.split, 0) + 1

    return {"sequences": len(dataset), "images": images_written,
            "splits": split_counts}


def load_catalog(path: Path) -> ClassCatalog:
    return ClassCatalog.load(Path(path) / CATALOG_NAME)


def _validate_sequence(seq: SceneSequence, catalog: ClassCatalog) -> None:
    side = catalog.canvas_side
    if seq.background.height != side or seq.background.width != side:
        raise ValidationError(
            f"background is {seq.background.height}x{seq.background.width}, "
            f"expected {side}x{side}", sequence_id=seq.id)
    if catalog.kind == "iclevr":
        expected = catalog.turns_per_sequence
        if expected is not None and len(seq.turns) != expected:
            raise ValidationError(f"expected {expected} turns, got {len(seq.turns)}",
                                  sequence_id=seq.id)
    prev_ids: set = set()
    for turn in seq.turns:
        if turn.image.height != side or turn.image.width != side:
            raise ValidationError(
                f"image is {turn.image.height}x{turn.image.width}, "
                f"expected {side}x{side}",
                sequence_id=seq.id, turn_index=turn.index)
        for obj in turn.scene:
            try:
                obj.validate(side)
            except ValidationError as err:
                raise ValidationError(str(err), sequence_id=seq.id,
                                      turn_index=turn.index) from err
        if catalog.kind == "iclevr":
            if len(turn.scene) != turn.index:
                raise ValidationError(
                    f"expected {turn.index} objects, got {len(turn.scene)}",
                    sequence_id=seq.id, turn_index=turn.index)
            ids = {o.class_id for o in turn.scene}
            if not prev_ids <= ids:
                raise ValidationError("object set is not monotone across turns",
                                      sequence_id=seq.id, turn_index=turn.index)
            prev_ids = ids


def read_dataset(path: Path, split: str | None = None) -> List[SceneSequence]:
    """Load a dataset directory, validating every sequence invariant.

    `split` optionally restricts loading to one split.
    """
    path = Path(path)
    catalog = load_catalog(path)
    sequences: List[SceneSequence] = []
    seen = set()
    index_path = path / INDEX_NAME
    with open(index_path, encoding="utf-8") as index:
        for lineno, line in enumerate(index, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValidationError(
                    f"malformed index line {lineno}: {err}") from err
            if split is not None and record["split"] != split:
                continue
            seq_id = record["id"]
            if seq_id in seen:
                raise ValidationError("duplicate sequence id", sequence_id=seq_id)
            seen.add(seq_id)
            background = load_png(path / record["background"])
            turns = []
            for turn_rec in record["turns"]:
                turns.append(Turn(
                    index=turn_rec["index"],
                    instruction_tokens=tuple(turn_rec["text"].split()),
                    scene=tuple(_object_from_record(o) for o in turn_rec["objects"]),
                    image=load_png(path / turn_rec["image"]),
                ))
            seq = SceneSequence(id=seq_id, turns=tuple(turns),
                                background=background, split=record["split"])
            _validate_sequence(seq, catalog)
            sequences.append(seq)
    return sequences
