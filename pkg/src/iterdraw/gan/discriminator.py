"""Pair encoder, feature fusion, and the projection discriminator."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from .config import ATTN_RESOLUTION, FUSION_MODES, ModelDims
from .layers import DiscBlockDown, SelfAttention, sn_conv, sn_linear


class PairEncoder(nn.Module):
    """Spectrally normalized CNN encoding one image to (n_d, side/8, side/8).

    For scaled configs whose output side is below 16, self-attention is
    applied at the internal 16x16 stage instead of in the discriminator body.
    """

    def __init__(self, dims: ModelDims):
        super().__init__()
        self.dims = dims
        w = max(16, dims.n_d // 4)
        self.conv1 = sn_conv(3, w, 4, stride=2, padding=1)
        self.conv2 = sn_conv(w, 2 * w, 4, stride=2, padding=1)
        self.conv3 = sn_conv(2 * w, dims.n_d, 4, stride=2, padding=1)
        self.attn = None
        self.attn_stage = None
        if dims.k_d < ATTN_RESOLUTION:
            side = dims.image_side
            stage_sides = (side // 2, side // 4, side // 8)
            stage_chans = (w, 2 * w, dims.n_d)
            for stage, (s, c) in enumerate(zip(stage_sides, stage_chans)):
                if s == ATTN_RESOLUTION:
                    self.attn = SelfAttention(c, spectral=True)
                    self.attn_stage = stage
                    break

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        side = self.dims.image_side
        if x.ndim != 4 or x.shape[1] != 3 or x.shape[2] != side or x.shape[3] != side:
            raise ValueError(f"expected (B, 3, {side}, {side}), got {tuple(x.shape)}")
        h = F.relu(self.conv1(x))
        if self.attn_stage == 0:
            h = self.attn(h)
        h = F.relu(self.conv2(h))
        if self.attn_stage == 1:
            h = self.attn(h)
        h = self.conv3(h)
        if self.attn_stage == 2:
            h = self.attn(h)
        return h


def fuse_features(feat_current: torch.Tensor,
                  feat_prev: torch.Tensor | None, mode: str) -> torch.Tensor:
    """Combine current/previous feature maps for the discriminator."""
    if mode not in FUSION_MODES:
        raise ValueError(f"fusion must be one of {FUSION_MODES}")
    if mode == "none":
        return feat_current
    if feat_prev is None:
        raise ValueError(f"fusion mode {mode!r} needs previous-image features")
    if feat_prev.shape != feat_current.shape:
        raise ValueError("fused feature maps must have identical shapes")
    if mode == "subtract":
        return feat_current - feat_prev
    return torch.cat([feat_current, feat_prev], dim=1)


class Discriminator(nn.Module):
    """Residual down-sampling network scored through projection conditioning.

    The pooled feature vector feeds three heads: an unconditional score, a
    projection term with the embedded context, and per-class detection
    logits. Every layer is spectrally normalized.
    """

    def __init__(self, dims: ModelDims, fusion: str = "subtract"):
        super().__init__()
        self.dims = dims
        self.fusion = fusion
        in_ch = dims.n_d * (2 if fusion == "concat" else 1)
        self.attn = SelfAttention(in_ch, spectral=True) \
            if dims.k_d == ATTN_RESOLUTION else None

        blocks = []
        res = dims.k_d
        ch = in_ch
        width = dims.disc_width
        next_ch = 4 * width
        first = True
        while res > 4:
            blocks.append(DiscBlockDown(ch, next_ch, downsample=True, first=first))
            ch, next_ch = next_ch, min(8 * width, next_ch * 2)
            res //= 2
            first = False
        blocks.append(DiscBlockDown(ch, next_ch, downsample=False, first=first))
        self.blocks = nn.ModuleList(blocks)
        self.phi_dim = next_ch
        self.score_head = sn_linear(self.phi_dim, 1)
        self.projection = sn_linear(dims.n_c, self.phi_dim, bias=False)
        self.aux_head = sn_linear(self.phi_dim, dims.num_classes)

    def pooled_features(self, fused: torch.Tensor) -> torch.Tensor:
        x = fused
        if self.attn is not None:
            x = self.attn(x)
        for block in self.blocks:
            x = block(x)
        x = F.relu(x)
        return x.sum(dim=(2, 3))

    def score_from_features(self, phi: torch.Tensor,
                            h: torch.Tensor) -> torch.Tensor:
        uncond = self.score_head(phi).squeeze(1)
        proj = (self.projection(h) * phi).sum(dim=1)
        return uncond + proj

    def forward(self, fused: torch.Tensor, h: torch.Tensor
                ) -> tuple[torch.Tensor, torch.Tensor]:
        phi = self.pooled_features(fused)
        return self.score_from_features(phi, h), self.aux_head(phi)
