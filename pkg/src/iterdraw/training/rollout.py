"""Autoregressive inference: each step consumes the previous generated image."""

from __future__ import annotations

from typing import List, Sequence

import numpy as np
import torch

from ..core.types import ImageGrid, SceneSequence
from ..gan.model import DrawerModel, image_to_tensor, sample_noise, tensor_to_image


def rollout_instructions(model: DrawerModel,
                         token_lists: Sequence[Sequence[str]],
                         background: np.ndarray,
                         seed: int = 0) -> List[np.ndarray]:
    """Generate one image per instruction starting from `background`.

    Deterministic: z_t comes from a (seed, t) keyed stream and conditioning
    augmentation uses its mean at inference time.
    """
    model.eval()
    images: List[np.ndarray] = []
    with torch.no_grad():
        canvas = image_to_tensor(background).unsqueeze(0)
        h = model.initial_context(1)
        for t, tokens in enumerate(token_lists, start=1):
            ids, lengths = model.tokens_to_ids([list(tokens)])
            d = model.encode_instruction(ids, lengths)
            h = model.update_context(d, h)
            z = sample_noise(model.dims.n_z, 1, seed, t)
            ca = model.augment_condition(h, torch.zeros(1, model.dims.n_c))
            f_prev = model.encode_canvas(canvas)
            canvas = model.generate_step(z, ca.c_aug, h, f_prev)
            images.append(tensor_to_image(canvas[0]))
    return images


def evaluate_rollout(model: DrawerModel, sequence: SceneSequence,
                     seed: int = 0) -> List[ImageGrid]:
    """Roll a dataset sequence out from its own background canvas.

    Iterative models produce one image per turn; the single-step variant
    consumes all instructions at once and produces one final image.
    """
    if model.ablation.iterative:
        token_lists = [turn.instruction_tokens for turn in sequence.turns]
    else:
        token_lists = [[tok for turn in sequence.turns
                        for tok in turn.instruction_tokens]]
    images = rollout_instructions(model, token_lists,
                                  sequence.background.values, seed=seed)
    return [ImageGrid(img) for img in images]
