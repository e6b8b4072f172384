"""Class catalog: the mapping between class ids and (shape, color) attributes.

The catalog is stored as `catalog.json` in the dataset root so that models
stay decoupled from any particular dataset build.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from .types import ValidationError


@dataclass(frozen=True)
class ClassEntry:
    class_id: int
    shape: str
    color: Optional[str] = None


@dataclass(frozen=True)
class ClassCatalog:
    """Dataset identity: kind, geometry, and the class-id table."""

    kind: str  # "iclevr" or "codraw"
    canvas_side: int
    classes: Tuple[ClassEntry, ...]
    turns_per_sequence: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        ids = [c.class_id for c in self.classes]
        if ids != list(range(len(ids))):
            raise ValidationError("class ids must be contiguous from 0")

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def class_id(self, shape: str, color: Optional[str] = None) -> int:
        for entry in self.classes:
            if entry.shape == shape and entry.color == color:
                return entry.class_id
        raise KeyError(f"no class for shape={shape!r} color={color!r}")

    def entry(self, class_id: int) -> ClassEntry:
        return self.classes[class_id]

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "canvas_side": self.canvas_side,
            "turns_per_sequence": self.turns_per_sequence,
            "classes": [
                {"id": c.class_id, "shape": c.shape, "color": c.color}
                for c in self.classes
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ClassCatalog":
        doc = json.loads(text)
        classes = tuple(
            ClassEntry(class_id=c["id"], shape=c["shape"], color=c.get("color"))
            for c in sorted(doc["classes"], key=lambda c: c["id"])
        )
        return cls(kind=doc["kind"], canvas_side=doc["canvas_side"],
                   classes=classes, turns_per_sequence=doc.get("turns_per_sequence"))

    def save(self, path: Path) -> None:
        path.write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "ClassCatalog":
        return cls.from_json(path.read_text(encoding="utf-8"))
