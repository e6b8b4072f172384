"""The Drawer: all trainable components behind one façade.

Bundles the instruction encoder, context recurrence, conditioning
augmentation, canvas encoder, generator, pair encoder, and discriminator,
and exposes the per-step operations the trainer and the inference service
compose.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from ..text.embeddings import EmbeddingTable
from ..text.encoder import (AugmentedCondition, ConditionAugmenter,
                            ContextUpdater, InstructionEncoder)
from .config import AblationConfig, ModelDims
from .discriminator import Discriminator, PairEncoder, fuse_features
from .generator import CanvasEncoder, Generator


class DrawerModel(nn.Module):
    def __init__(self, dims: ModelDims, ablation: AblationConfig,
                 table: EmbeddingTable):
        super().__init__()
        self.dims = dims
        self.ablation = ablation
        self.table = table
        if table.dim != dims.embed_dim:
            raise ValueError(f"embedding table dim {table.dim} does not match "
                             f"configured {dims.embed_dim}")
        self.text_encoder = InstructionEncoder(table, out_dim=dims.d_dim)
        self.context = ContextUpdater(d_dim=dims.d_dim, h_dim=dims.n_c)
        self.augmenter = ConditionAugmenter(h_dim=dims.n_c, c_dim=dims.n_c)
        self.generator = Generator(dims, use_gprior=ablation.use_gprior)
        self.canvas_encoder = CanvasEncoder(dims) if ablation.use_gprior else None
        self.pair_encoder = PairEncoder(dims)
        self.discriminator = Discriminator(dims, fusion=ablation.fusion)

    # ---- text side -------------------------------------------------------

    def tokens_to_ids(self, token_lists: Sequence[Sequence[str]]
                      ) -> Tuple[torch.Tensor, torch.Tensor]:
        """Right-pad token lists into an id batch plus lengths."""
        if any(len(toks) == 0 for toks in token_lists):
            raise ValueError("empty instruction")
        max_len = max(len(toks) for toks in token_lists)
        ids = torch.zeros(len(token_lists), max_len, dtype=torch.long)
        lengths = torch.zeros(len(token_lists), dtype=torch.long)
        for i, toks in enumerate(token_lists):
            row = self.table.ids(toks)
            ids[i, :len(row)] = torch.tensor(row, dtype=torch.long)
            lengths[i] = len(row)
        return ids, lengths

    def encode_instruction(self, ids: torch.Tensor,
                           lengths: torch.Tensor | None = None) -> torch.Tensor:
        return self.text_encoder(ids, lengths)

    def update_context(self, d: torch.Tensor, h_prev: torch.Tensor) -> torch.Tensor:
        return self.context(d, h_prev)

    def initial_context(self, batch: int, device=None) -> torch.Tensor:
        return self.context.initial_state(batch, device=device)

    def augment_condition(self, h: torch.Tensor,
                          noise: torch.Tensor | None = None) -> AugmentedCondition:
        return self.augmenter(h, noise)

    # ---- image side ------------------------------------------------------

    def encode_canvas(self, x_prev: torch.Tensor) -> torch.Tensor | None:
        if self.canvas_encoder is None:
            return None
        return self.canvas_encoder(x_prev)

    def generate_step(self, z: torch.Tensor, c_aug: torch.Tensor,
                      h: torch.Tensor,
                      f_prev: torch.Tensor | None) -> torch.Tensor:
        return self.generator(z, c_aug, h, f_prev)

    def fuse_pair(self, x_t: torch.Tensor,
                  x_prev: torch.Tensor | None) -> torch.Tensor:
        feat_t = self.pair_encoder(x_t)
        if self.ablation.fusion == "none":
            return feat_t
        feat_prev = self.pair_encoder(x_prev)
        return fuse_features(feat_t, feat_prev, self.ablation.fusion)

    def discriminate(self, fused: torch.Tensor, h: torch.Tensor
                     ) -> Tuple[torch.Tensor, torch.Tensor]:
        return self.discriminator(fused, h)

    # ---- parameter groups for the update schedule -------------------------

    def parameter_groups(self) -> dict:
        groups = {
            "discriminator": list(self.discriminator.parameters()),
            "pair_encoder": list(self.pair_encoder.parameters()),
            "generator": list(self.generator.parameters())
                         + list(self.augmenter.parameters()),
            "text_encoder": [p for p in self.text_encoder.parameters()
                             if p.requires_grad],
            "context": list(self.context.parameters()),
        }
        if self.canvas_encoder is not None:
            groups["canvas_encoder"] = list(self.canvas_encoder.parameters())
        return groups


def sample_noise(n_z: int, batch: int, seed: int, step: int) -> torch.Tensor:
    """Deterministic per-step noise: an independent stream keyed by
    (seed, step)."""
    rng = np.random.default_rng([seed, step])
    return torch.from_numpy(rng.standard_normal((batch, n_z)).astype(np.float32))


def image_to_tensor(values: np.ndarray) -> torch.Tensor:
    """(H, W, 3) float array in [-1, 1] -> (3, H, W) tensor.

    Copies so that read-only dataset arrays never alias tensor storage.
    """
    return torch.from_numpy(np.array(values, copy=True)).permute(2, 0, 1)


def tensor_to_image(tensor: torch.Tensor) -> np.ndarray:
    """(3, H, W) tensor -> (H, W, 3) float32 array clamped to [-1, 1]."""
    arr = tensor.detach().clamp(-1.0, 1.0).permute(1, 2, 0).cpu().numpy()
    return np.ascontiguousarray(arr, dtype=np.float32)


def batch_images(images: List[np.ndarray]) -> torch.Tensor:
    return torch.stack([image_to_tensor(v) for v in images])
