"""Instruction encoding and the recurrent dialogue context.

A bi-directional layer-normalized GRU turns token embeddings into a fixed
1024-d instruction encoding (512 per direction). A second layer-normalized
GRU cell folds successive encodings into the dialogue context vector; its
initial state is all zeros.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np
import torch
from torch import nn

from .embeddings import EmbeddingTable


class LayerNormGRUCell(nn.Module):
    """GRU cell with layer normalization on both gate projections."""

    def __init__(self, input_size: int, hidden_size: int):
        super().__init__()
        self.hidden_size = hidden_size
        self.x_proj = nn.Linear(input_size, 3 * hidden_size)
        self.h_proj = nn.Linear(hidden_size, 3 * hidden_size, bias=False)
        self.ln_x = nn.LayerNorm(3 * hidden_size)
        self.ln_h = nn.LayerNorm(3 * hidden_size)

    def forward(self, x: torch.Tensor, h: torch.Tensor) -> torch.Tensor:
        gx = self.ln_x(self.x_proj(x))
        gh = self.ln_h(self.h_proj(h))
        xr, xz, xn = gx.chunk(3, dim=-1)
        hr, hz, hn = gh.chunk(3, dim=-1)
        reset = torch.sigmoid(xr + hr)
        update = torch.sigmoid(xz + hz)
        cand = torch.tanh(xn + reset * hn)
        return (1.0 - update) * cand + update * h


class InstructionEncoder(nn.Module):
    """Bi-directional recurrent encoder over a frozen embedding table."""

    def __init__(self, table: EmbeddingTable, out_dim: int = 1024):
        super().__init__()
        if out_dim % 2 != 0:
            raise ValueError("output dimension must be even")
        self.out_dim = out_dim
        matrix = torch.from_numpy(np.array(table.matrix))
        self.embed = nn.Embedding.from_pretrained(matrix, freeze=True)
        half = out_dim // 2
        self.fwd = LayerNormGRUCell(table.dim, half)
        self.bwd = LayerNormGRUCell(table.dim, half)

    def forward(self, ids: torch.Tensor,
                lengths: Optional[torch.Tensor] = None) -> torch.Tensor:
        """ids: (B, L) int64, right-padded; lengths: (B,). Returns (B, out_dim)."""
        if ids.ndim != 2 or ids.shape[1] == 0:
            raise ValueError("instruction id batch must be (B, L) with L >= 1")
        batch, max_len = ids.shape
        if lengths is None:
            lengths = torch.full((batch,), max_len, dtype=torch.long,
                                 device=ids.device)
        if (lengths < 1).any():
            raise ValueError("empty instruction in batch")
        emb = self.embed(ids)
        half = self.out_dim // 2
        h_fwd = emb.new_zeros(batch, half)
        h_bwd = emb.new_zeros(batch, half)
        for t in range(max_len):
            active = (t < lengths).unsqueeze(1)
            h_fwd = torch.where(active, self.fwd(emb[:, t], h_fwd), h_fwd)
        for t in range(max_len - 1, -1, -1):
            active = (t < lengths).unsqueeze(1)
            h_bwd = torch.where(active, self.bwd(emb[:, t], h_bwd), h_bwd)
        return torch.cat([h_fwd, h_bwd], dim=1)


class ContextUpdater(nn.Module):
    """One recurrence step folding the new instruction encoding into the
    dialogue context."""

    def __init__(self, d_dim: int = 1024, h_dim: int = 1024):
        super().__init__()
        self.h_dim = h_dim
        self.cell = LayerNormGRUCell(d_dim, h_dim)

    def initial_state(self, batch: int, device=None) -> torch.Tensor:
        return torch.zeros(batch, self.h_dim, device=device)

    def forward(self, d: torch.Tensor, h_prev: torch.Tensor) -> torch.Tensor:
        return self.cell(d, h_prev)


class AugmentedCondition(NamedTuple):
    c_aug: torch.Tensor
    mu: torch.Tensor
    logvar: torch.Tensor


class ConditionAugmenter(nn.Module):
    """Gaussian reparameterization around the context: c = mu + sigma * eps.

    The log-variance bias starts low so early training is not drowned in
    conditioning noise; the maps are free to widen the distribution later.
    """

    def __init__(self, h_dim: int = 1024, c_dim: int = 1024,
                 logvar_bias_init: float = -4.0):
        super().__init__()
        self.c_dim = c_dim
        self.mu = nn.Linear(h_dim, c_dim)
        self.logvar = nn.Linear(h_dim, c_dim)
        nn.init.constant_(self.logvar.bias, logvar_bias_init)

    def forward(self, h: torch.Tensor,
                noise: Optional[torch.Tensor] = None) -> AugmentedCondition:
        mu = self.mu(h)
        logvar = self.logvar(h)
        if noise is None:
            noise = torch.randn_like(mu)
        c_aug = mu + torch.exp(0.5 * logvar) * noise
        return AugmentedCondition(c_aug=c_aug, mu=mu, logvar=logvar)
