"""Shared network blocks: self-attention, conditional batch norm, and
residual up/down-sampling blocks."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn
from torch.nn.utils.parametrizations import spectral_norm


def sn_conv(in_ch: int, out_ch: int, kernel: int, stride: int = 1,
            padding: int = 0) -> nn.Module:
    return spectral_norm(nn.Conv2d(in_ch, out_ch, kernel, stride, padding))


def sn_linear(in_f: int, out_f: int, bias: bool = True) -> nn.Module:
    return spectral_norm(nn.Linear(in_f, out_f, bias=bias))


class SelfAttention(nn.Module):
    """Non-local attention over spatial positions; the learnable output
    scale starts at zero so the layer is the identity at init."""

    def __init__(self, channels: int, spectral: bool = False):
        super().__init__()
        inner = max(1, channels // 8)
        conv = (lambda i, o: sn_conv(i, o, 1)) if spectral else \
               (lambda i, o: nn.Conv2d(i, o, 1))
        self.query = conv(channels, inner)
        self.key = conv(channels, inner)
        self.value = conv(channels, channels)
        self.gamma = nn.Parameter(torch.zeros(1))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, c, h, w = x.shape
        n = h * w
        q = self.query(x).reshape(b, -1, n)
        k = self.key(x).reshape(b, -1, n)
        v = self.value(x).reshape(b, c, n)
        attn = torch.softmax(torch.bmm(q.transpose(1, 2), k), dim=-1)
        out = torch.bmm(v, attn.transpose(1, 2)).reshape(b, c, h, w)
        return self.gamma * out + x


class ConditionalBatchNorm2d(nn.Module):
    """Batch norm whose per-channel gain and bias are linear maps of a
    conditioning vector. With gain 1 and bias 0 it is plain batch norm."""

    def __init__(self, channels: int, cond_dim: int):
        super().__init__()
        self.bn = nn.BatchNorm2d(channels, affine=False)
        self.gain = nn.Linear(cond_dim, channels)
        self.bias = nn.Linear(cond_dim, channels)
        # Near-identity at init, but condition-sensitive from the start.
        nn.init.normal_(self.gain.weight, std=0.02)
        nn.init.ones_(self.gain.bias)
        nn.init.normal_(self.bias.weight, std=0.02)
        nn.init.zeros_(self.bias.bias)

    def forward(self, x: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        normed = self.bn(x)
        gain = self.gain(cond).unsqueeze(-1).unsqueeze(-1)
        bias = self.bias(cond).unsqueeze(-1).unsqueeze(-1)
        return gain * normed + bias


class GenBlockUp(nn.Module):
    """Residual generator block: conditional BN, ReLU, x2 nearest upsample."""

    def __init__(self, in_ch: int, out_ch: int, cond_dim: int):
        super().__init__()
        self.cbn1 = ConditionalBatchNorm2d(in_ch, cond_dim)
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, padding=1)
        self.cbn2 = ConditionalBatchNorm2d(out_ch, cond_dim)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1)
        self.skip = nn.Conv2d(in_ch, out_ch, 1)

    def forward(self, x: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        h = F.relu(self.cbn1(x, cond))
        h = F.interpolate(h, scale_factor=2, mode="nearest")
        h = self.conv1(h)
        h = F.relu(self.cbn2(h, cond))
        h = self.conv2(h)
        skip = self.skip(F.interpolate(x, scale_factor=2, mode="nearest"))
        return h + skip


class DiscBlockDown(nn.Module):
    """Residual discriminator block with spectral norm on every layer."""

    def __init__(self, in_ch: int, out_ch: int, downsample: bool = True,
                 first: bool = False):
        super().__init__()
        self.downsample = downsample
        self.first = first
        self.conv1 = sn_conv(in_ch, out_ch, 3, padding=1)
        self.conv2 = sn_conv(out_ch, out_ch, 3, padding=1)
        self.skip = sn_conv(in_ch, out_ch, 1) if (in_ch != out_ch or downsample) \
            else None

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = x if self.first else F.relu(x)
        h = self.conv1(h)
        h = F.relu(h)
        h = self.conv2(h)
        if self.downsample:
            h = F.avg_pool2d(h, 2)
        skip = x
        if self.first:
            # Pool before the 1x1 on the shortcut of the stem block.
            if self.downsample:
                skip = F.avg_pool2d(skip, 2)
            if self.skip is not None:
                skip = self.skip(skip)
        else:
            if self.skip is not None:
                skip = self.skip(skip)
            if self.downsample:
                skip = F.avg_pool2d(skip, 2)
        return h + skip
