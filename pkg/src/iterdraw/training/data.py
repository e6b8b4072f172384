"""Tensor batches over scene sequences, bucketed by length."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence

import numpy as np
import torch

from ..core.types import SceneSequence
from ..gan.model import image_to_tensor


@dataclass
class SequenceBatch:
    """Teacher-forcing bundle: images[:, 0] is the background canvas x_0."""

    ids: List[str]
    images: torch.Tensor           # (B, T+1, 3, S, S)
    token_lists: List[List[List[str]]]  # [T][B] token lists
    labels: torch.Tensor           # (B, T, num_classes) presence multi-hot

    @property
    def batch_size(self) -> int:
        return self.images.shape[0]

    @property
    def num_steps(self) -> int:
        return self.images.shape[1] - 1


def prepare_batch(sequences: Sequence[SceneSequence], num_classes: int,
                  noniterative: bool = False) -> SequenceBatch:
    lengths = {len(s.turns) for s in sequences}
    if len(lengths) != 1:
        raise ValueError(f"batch mixes sequence lengths {sorted(lengths)}")
    t_steps = lengths.pop()
    if t_steps < 1:
        raise ValueError("sequences must have at least one turn")

    if noniterative:
        # All instructions collapse into one; only the final image is generated.
        images = torch.stack([
            torch.stack([image_to_tensor(s.background.values),
                         image_to_tensor(s.turns[-1].image.values)])
            for s in sequences])
        merged = [[tok for turn in s.turns for tok in turn.instruction_tokens]
                  for s in sequences]
        token_lists = [merged]
        labels = torch.zeros(len(sequences), 1, num_classes)
        for b, s in enumerate(sequences):
            for obj in s.turns[-1].scene:
                labels[b, 0, obj.class_id] = 1.0
        return SequenceBatch(ids=[s.id for s in sequences], images=images,
                             token_lists=token_lists, labels=labels)

    images = torch.stack([
        torch.stack([image_to_tensor(s.background.values)]
                    + [image_to_tensor(t.image.values) for t in s.turns])
        for s in sequences])
    token_lists = [[list(s.turns[t].instruction_tokens) for s in sequences]
                   for t in range(t_steps)]
    labels = torch.zeros(len(sequences), t_steps, num_classes)
    for b, s in enumerate(sequences):
        for t, turn in enumerate(s.turns):
            for obj in turn.scene:
                labels[b, t, obj.class_id] = 1.0
    return SequenceBatch(ids=[s.id for s in sequences], images=images,
                         token_lists=token_lists, labels=labels)


def bucket_batches(sequences: Sequence[SceneSequence], batch_size: int,
                   rng: np.random.Generator) -> Iterator[List[SceneSequence]]:
    """Shuffle, group by turn count, and yield same-length batches."""
    buckets: Dict[int, List[SceneSequence]] = {}
    order = rng.permutation(len(sequences))
    for idx in order:
        seq = sequences[idx]
        buckets.setdefault(len(seq.turns), []).append(seq)
    for length in sorted(buckets):
        group = buckets[length]
        for start in range(0, len(group), batch_size):
            yield group[start:start + batch_size]
