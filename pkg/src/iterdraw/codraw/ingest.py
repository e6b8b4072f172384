"""Ingest raw Teller/Drawer scene records into the canonical dataset form.

The raw input is a JSON document over the public clip-art dialogue
release: scenes with per-turn Teller/Drawer messages, object annotations,
and pre-rendered turn images (PNGs supplied in a separate directory).
Turns are collapsed so that every kept turn changes the object count, and
both sides of the dialogue are concatenated into a single instruction with
a delimiter token between them.

Expected raw document shape::

    {
      "object_names": ["sun", "tree", ...],
      "scenes": [
        {
          "id": "scene0", "split": "train",
          "background": "scene0/bg.png",
          "turns": [
            {"teller": ["..."], "drawer": ["ok"],
             "objects": [{"class_id": 0, "shape": "sun", "x": 4.0, "y": 9.0}],
             "image": "scene0/t1.png"},
            ...
          ]
        },
        ...
      ]
    }

Image paths are relative to the images directory passed alongside.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ..core.catalog import ClassCatalog, ClassEntry
from ..core.datasets import load_png, write_dataset
from ..core.types import ImageGrid, ObjectSpec, SceneSequence, Turn

TELLER_DRAWER_DELIMITER = "<teller-drawer>"

_TOKEN_RE = re.compile(r"[a-z0-9']+")

# Spell correction is pluggable; the default is the identity (no external
# services involved).
TextNormalizer = Callable[[str], str]


def identity_normalizer(text: str) -> str:
    return text


class DegenerateSequenceWarning(UserWarning):
    """Raised (as a warning) when a scene's object count never changes."""


@dataclass(frozen=True)
class RawTurn:
    """One raw dialogue turn before collapsing."""

    teller_msgs: Tuple[str, ...]
    drawer_msgs: Tuple[str, ...]
    objects: Tuple[ObjectSpec, ...]
    image_path: Optional[Path] = None

    def __post_init__(self):
        object.__setattr__(self, "teller_msgs", tuple(self.teller_msgs))
        object.__setattr__(self, "drawer_msgs", tuple(self.drawer_msgs))
        object.__setattr__(self, "objects", tuple(self.objects))
        if not self.teller_msgs and not self.drawer_msgs:
            raise ValueError("raw turn carries no messages")


def collapse_turns(raw: Sequence[RawTurn]) -> List[RawTurn]:
    """Merge consecutive turns until the object count changes.

    Runs of equal object count become one turn (messages concatenated in
    order, final turn's objects and image kept). A sequence whose count
    never changes between turns is annotation noise: the result is empty
    and a DegenerateSequenceWarning is emitted.
    """
    if not raw:
        raise ValueError("raw turn list must be non-empty")
    counts = [len(t.objects) for t in raw]
    if all(c == counts[0] for c in counts):
        warnings.warn("object count never changes; dropping sequence",
                      DegenerateSequenceWarning)
        return []

    collapsed: List[RawTurn] = []
    group: List[RawTurn] = []
    for turn in raw:
        if group and len(turn.objects) != len(group[-1].objects):
            collapsed.append(_merge(group))
            group = []
        group.append(turn)
    collapsed.append(_merge(group))
    return collapsed


def _merge(group: Sequence[RawTurn]) -> RawTurn:
    teller: List[str] = []
    drawer: List[str] = []
    for t in group:
        teller.extend(t.teller_msgs)
        drawer.extend(t.drawer_msgs)
    last = group[-1]
    return RawTurn(teller_msgs=tuple(teller), drawer_msgs=tuple(drawer),
                   objects=last.objects, image_path=last.image_path)


def tokenize(text: str) -> List[str]:
    """Lowercased word/number tokens; punctuation is dropped."""
    return _TOKEN_RE.findall(text.lower())


def compose_instruction(teller_msgs: Sequence[str], drawer_msgs: Sequence[str],
                        normalizer: TextNormalizer = identity_normalizer
                        ) -> List[str]:
    """Teller tokens, the delimiter, then Drawer tokens."""
    teller = tokenize(normalizer(" ".join(teller_msgs)))
    drawer = tokenize(normalizer(" ".join(drawer_msgs)))
    return teller + [TELLER_DRAWER_DELIMITER] + drawer


def map_tokens(vocab: Dict[str, int], tokens: Sequence[str],
               unk_id: int = 0) -> List[int]:
    """Vocabulary lookup with out-of-vocabulary tokens mapped to `unk_id`."""
    return [vocab.get(tok, unk_id) for tok in tokens]


@dataclass
class RawScene:
    scene_id: str
    split: str
    turns: List[RawTurn] = field(default_factory=list)
    background_path: Optional[Path] = None


def _load_raw_scenes(raw_path: Path, images_dir: Path) -> List[RawScene]:
    doc = json.loads(Path(raw_path).read_text(encoding="utf-8"))
    scenes = []
    for rec in doc["scenes"]:
        turns = []
        for turn_rec in rec["turns"]:
            objects = tuple(
                ObjectSpec(class_id=o["class_id"], shape=o["shape"],
                           color=o.get("color"), centroid=(o["x"], o["y"]))
                for o in turn_rec["objects"])
            turns.append(RawTurn(
                teller_msgs=tuple(turn_rec.get("teller", [])),
                drawer_msgs=tuple(turn_rec.get("drawer", [])),
                objects=objects,
                image_path=images_dir / turn_rec["image"]))
        scenes.append(RawScene(scene_id=rec["id"], split=rec["split"],
                               turns=turns,
                               background_path=images_dir / rec["background"]))
    return scenes


def ingest(raw_path: Path, images_dir: Path, out_dir: Path,
           catalog: ClassCatalog,
           normalizer: TextNormalizer = identity_normalizer) -> dict:
    """Transform a raw archive into the canonical dataset layout."""
    scenes = _load_raw_scenes(Path(raw_path), Path(images_dir))
    sequences: List[SceneSequence] = []
    dropped = 0
    for scene in scenes:
        kept = collapse_turns(scene.turns)
        if not kept:
            dropped += 1
            continue
        turns = []
        for idx, raw_turn in enumerate(kept, start=1):
            tokens = compose_instruction(raw_turn.teller_msgs,
                                         raw_turn.drawer_msgs, normalizer)
            turns.append(Turn(index=idx, instruction_tokens=tuple(tokens),
                              scene=raw_turn.objects,
                              image=load_png(raw_turn.image_path)))
        background = load_png(scene.background_path)
        sequences.append(SceneSequence(id=scene.scene_id, turns=tuple(turns),
                                       background=background,
                                       split=scene.split))
    summary = write_dataset(sequences, out_dir, catalog)
    summary["dropped_degenerate"] = dropped
    return summary


def catalog_from_names(names: Sequence[str], canvas_side: int) -> ClassCatalog:
    """Clip-art catalog: one class per object name, no color attribute."""
    entries = tuple(ClassEntry(class_id=i, shape=name, color=None)
                    for i, name in enumerate(names))
    return ClassCatalog(kind="codraw", canvas_side=canvas_side,
                        classes=entries, turns_per_sequence=None)
