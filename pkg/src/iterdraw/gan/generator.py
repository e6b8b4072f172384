"""Canvas encoder and the conditioned residual generator."""

from __future__ import annotations

from typing import List

import torch
import torch.nn.functional as F
from torch import nn

from .config import ATTN_RESOLUTION, ModelDims
from .layers import ConditionalBatchNorm2d, GenBlockUp, SelfAttention


class CanvasEncoder(nn.Module):
    """Shallow CNN mapping the previous image to low-resolution feature
    maps (side/8, batch-normalized at the output)."""

    def __init__(self, dims: ModelDims):
        super().__init__()
        self.dims = dims
        w = max(16, dims.n_g // 4)
        self.conv1 = nn.Conv2d(3, w, 4, stride=2, padding=1)
        self.conv2 = nn.Conv2d(w, 2 * w, 4, stride=2, padding=1)
        self.conv3 = nn.Conv2d(2 * w, dims.n_g, 4, stride=2, padding=1)
        self.out_bn = nn.BatchNorm2d(dims.n_g)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        side = self.dims.image_side
        if x.ndim != 4 or x.shape[1] != 3 or x.shape[2] != side or x.shape[3] != side:
            raise ValueError(f"expected (B, 3, {side}, {side}), got {tuple(x.shape)}")
        h = F.relu(self.conv1(x))
        h = F.relu(self.conv2(h))
        return self.out_bn(self.conv3(h))


def _gen_channels(n_blocks: int, width: int) -> List[int]:
    mults = [8, 8, 4, 2, 1, 1, 1][:n_blocks + 1]
    return [width * m for m in mults]


class Generator(nn.Module):
    """Residual up-sampling generator.

    The concatenated [noise; augmented condition] seeds a 4x4 map; every
    block is conditioned through conditional batch norm on the context
    vector; self-attention sits at the 16x16 level; canvas features are
    concatenated channel-wise at their matching resolution when enabled.
    """

    def __init__(self, dims: ModelDims, use_gprior: bool = True):
        super().__init__()
        self.dims = dims
        self.use_gprior = use_gprior
        n_blocks = (dims.image_side // 4).bit_length() - 1
        chans = _gen_channels(n_blocks, dims.gen_width)
        self.seed_ch = chans[0]
        self.fc = nn.Linear(dims.n_z + dims.n_c, 4 * 4 * self.seed_ch)

        blocks = []
        in_ch = self.seed_ch
        res = 4
        self.attn_index = None
        self.concat_index = None
        self.concat_at_seed = use_gprior and dims.k_g == 4
        if self.concat_at_seed:
            in_ch += dims.n_g
        for i in range(n_blocks):
            blocks.append(GenBlockUp(in_ch, chans[i + 1], dims.n_c))
            res *= 2
            in_ch = chans[i + 1]
            if res == ATTN_RESOLUTION:
                self.attn_index = i
                self.attn = SelfAttention(in_ch)
            if res == dims.k_g and use_gprior:
                self.concat_index = i
                in_ch += dims.n_g
        self.blocks = nn.ModuleList(blocks)
        self.out_cbn = ConditionalBatchNorm2d(in_ch, dims.n_c)
        self.out_conv = nn.Conv2d(in_ch, 3, 3, padding=1)

    def forward(self, z: torch.Tensor, c_aug: torch.Tensor, h: torch.Tensor,
                f_prev: torch.Tensor | None = None) -> torch.Tensor:
        if self.use_gprior and f_prev is None:
            raise ValueError("canvas features required when the prior is enabled")
        x = self.fc(torch.cat([z, c_aug], dim=1))
        x = x.reshape(-1, self.seed_ch, 4, 4)
        if self.concat_at_seed:
            x = torch.cat([x, f_prev], dim=1)
        for i, block in enumerate(self.blocks):
            x = block(x, h)
            if i == self.attn_index:
                x = self.attn(x)
            if i == self.concat_index:
                x = torch.cat([x, f_prev], dim=1)
        x = F.relu(self.out_cbn(x, h))
        return torch.tanh(self.out_conv(x))
