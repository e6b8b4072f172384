"""Alternating, teacher-forced sequence training.

Schedule: the discriminator (with its pair encoder) and the generator
(with conditioning augmentation) take one update each per time step;
gradients for the canvas encoder, the context recurrence, and the text
encoder accumulate across the sequence and apply once at its end. Text
and context gradients originate from the discriminator objective only,
which the generator step enforces by consuming a detached context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import torch
from torch import nn

from ..core.types import SceneSequence
from ..gan.losses import aux_bce, d_hinge_loss, g_hinge_loss, gradient_penalty
from ..gan.model import DrawerModel, sample_noise
from .config import TrainConfig
from .data import SequenceBatch, bucket_batches, prepare_batch

SEQUENCE_GROUPS = ("canvas_encoder", "context", "text_encoder")


class NonFiniteLossError(RuntimeError):
    def __init__(self, components: Dict[str, float]):
        super().__init__(f"non-finite loss components: {components}")
        self.components = components


@dataclass
class StepMetrics:
    d_loss: List[float] = field(default_factory=list)
    g_loss: List[float] = field(default_factory=list)
    aux_d: List[float] = field(default_factory=list)
    aux_g: List[float] = field(default_factory=list)
    gp: List[float] = field(default_factory=list)
    grad_norms: Dict[str, List[float]] = field(default_factory=dict)

    def record_norm(self, group: str, value: float) -> None:
        self.grad_norms.setdefault(group, []).append(value)


def build_optimizers(model: DrawerModel,
                     config: TrainConfig) -> Dict[str, torch.optim.Optimizer]:
    groups = model.parameter_groups()
    betas = tuple(config.adam_betas)
    wd = config.weight_decay
    opts = {
        "d": torch.optim.Adam([
            {"params": groups["discriminator"], "lr": config.lr_d},
            {"params": groups["pair_encoder"], "lr": config.lr_img_enc},
        ], betas=betas, weight_decay=wd),
        "g": torch.optim.Adam(groups["generator"], lr=config.lr_g,
                              betas=betas, weight_decay=wd),
        "text_encoder": torch.optim.Adam(groups["text_encoder"],
                                         lr=config.lr_text, betas=betas,
                                         weight_decay=wd),
        "context": torch.optim.Adam(groups["context"], lr=config.lr_r,
                                    betas=betas, weight_decay=wd),
    }
    if "canvas_encoder" in groups:
        opts["canvas_encoder"] = torch.optim.Adam(groups["canvas_encoder"],
                                                  lr=config.lr_img_enc,
                                                  betas=betas, weight_decay=wd)
    return opts


def _clip(params, max_norm: float) -> float:
    return float(nn.utils.clip_grad_norm_(params, max_norm))


def _check_finite(components: Dict[str, float]) -> None:
    if any(not math.isfinite(v) for v in components.values()):
        raise NonFiniteLossError(components)


class Trainer:
    """Owns the model, optimizers, and per-component update counters."""

    def __init__(self, model: DrawerModel, config: TrainConfig):
        self.model = model
        self.config = config
        self.optimizers = build_optimizers(model, config)
        self.update_counts: Dict[str, int] = {
            "discriminator": 0, "generator": 0,
            "canvas_encoder": 0, "context": 0, "text_encoder": 0,
        }
        self.global_step = 0  # counts per-time-step D/G update pairs

    def encode_step_context(self, token_lists: Sequence[Sequence[str]],
                            h_prev: torch.Tensor) -> torch.Tensor:
        ids, lengths = self.model.tokens_to_ids(token_lists)
        d_t = self.model.encode_instruction(ids, lengths)
        # Truncated recurrence: each step's context cell receives gradient
        # from that step's discriminator loss only.
        return self.model.update_context(d_t, h_prev)

    def discriminator_losses(self, x_prev: torch.Tensor, x_real: torch.Tensor,
                             y: torch.Tensor, h_t: torch.Tensor,
                             step_seed: int) -> Dict[str, torch.Tensor]:
        model = self.model
        cfg = self.config
        batch = x_real.shape[0]
        use_wrong = model.ablation.use_wrong_loss and batch >= 2
        h_det = h_t.detach()
        with torch.no_grad():
            f_ng = model.encode_canvas(x_prev)
            z = sample_noise(model.dims.n_z, batch, cfg.seed, 2 * step_seed)
            eps = torch.randn(batch, model.dims.n_c)
            ca = model.augment_condition(h_det, eps)
            fake = model.generate_step(z, ca.c_aug, h_det, f_ng)

        fused_real = model.fuse_pair(x_real, x_prev)
        phi_real = model.discriminator.pooled_features(fused_real)
        s_real = model.discriminator.score_from_features(phi_real, h_t)
        s_fake, _ = model.discriminate(model.fuse_pair(fake, x_prev), h_t)
        if use_wrong:
            s_wrong = model.discriminator.score_from_features(
                phi_real, torch.roll(h_t, shifts=1, dims=0))
            d_adv = d_hinge_loss(s_real, s_fake, s_wrong)
        else:
            d_adv = (torch.relu(1.0 - s_real).mean()
                     + torch.relu(1.0 + s_fake).mean())
        if model.ablation.use_aux:
            aux_d = aux_bce(y, torch.sigmoid(
                model.discriminator.aux_head(phi_real)))
        else:
            aux_d = torch.zeros(())

        def d_on_real(x, x_prev=x_prev, h=h_det):
            fused = self.model.fuse_pair(x, x_prev)
            return self.model.discriminator(fused, h)[0]

        gp = gradient_penalty(d_on_real, x_real, gamma=cfg.gamma)
        total = d_adv + cfg.beta * aux_d + gp
        return {"total": total, "d_adv": d_adv, "aux_d": aux_d, "gp": gp}

    def generator_losses(self, x_prev: torch.Tensor, y: torch.Tensor,
                         h_t: torch.Tensor,
                         step_seed: int) -> Dict[str, torch.Tensor]:
        model = self.model
        cfg = self.config
        batch = x_prev.shape[0]
        h_det = h_t.detach()
        f_g = model.encode_canvas(x_prev)
        z = sample_noise(model.dims.n_z, batch, cfg.seed, 2 * step_seed + 1)
        eps = torch.randn(batch, model.dims.n_c)
        ca = model.augment_condition(h_det, eps)
        fake = model.generate_step(z, ca.c_aug, h_det, f_g)
        s_fake, aux_logits = model.discriminate(model.fuse_pair(fake, x_prev),
                                                h_det)
        aux_g = aux_bce(y, torch.sigmoid(aux_logits)) if model.ablation.use_aux \
            else torch.zeros(())
        total = g_hinge_loss(s_fake, aux_g, beta=cfg.beta)
        if cfg.ca_kl > 0:
            kl = 0.5 * (ca.mu.pow(2) + ca.logvar.exp()
                        - 1.0 - ca.logvar).sum(dim=1).mean()
            total = total + cfg.ca_kl * kl
        return {"total": total, "aux_g": aux_g}

    def train_sequence_batch(self, batch: SequenceBatch) -> StepMetrics:
        model = self.model
        cfg = self.config
        groups = model.parameter_groups()
        metrics = StepMetrics()

        model.train()
        for opt_name in SEQUENCE_GROUPS:
            if opt_name in self.optimizers:
                self.optimizers[opt_name].zero_grad(set_to_none=True)

        h_prev = model.initial_context(batch.batch_size)
        for t in range(1, batch.num_steps + 1):
            x_prev = batch.images[:, t - 1]
            x_real = batch.images[:, t]
            y = batch.labels[:, t - 1]
            h_t = self.encode_step_context(batch.token_lists[t - 1], h_prev)

            self.optimizers["d"].zero_grad(set_to_none=True)
            d_parts = self.discriminator_losses(x_prev, x_real, y, h_t,
                                                self.global_step)
            _check_finite({k: float(v.detach()) for k, v in d_parts.items()})
            d_parts["total"].backward()
            metrics.record_norm("discriminator",
                                _clip(groups["discriminator"], cfg.grad_clip_norm))
            metrics.record_norm("pair_encoder",
                                _clip(groups["pair_encoder"], cfg.grad_clip_norm))
            self.optimizers["d"].step()
            self.update_counts["discriminator"] += 1

            self.optimizers["g"].zero_grad(set_to_none=True)
            g_parts = self.generator_losses(x_prev, y, h_t, self.global_step)
            _check_finite({k: float(v.detach()) for k, v in g_parts.items()})
            g_parts["total"].backward()
            metrics.record_norm("generator",
                                _clip(groups["generator"], cfg.grad_clip_norm))
            self.optimizers["g"].step()
            self.update_counts["generator"] += 1

            metrics.d_loss.append(float(d_parts["total"].detach()))
            metrics.g_loss.append(float(g_parts["total"].detach()))
            metrics.aux_d.append(float(d_parts["aux_d"].detach()))
            metrics.aux_g.append(float(g_parts["aux_g"].detach()))
            metrics.gp.append(float(d_parts["gp"].detach()))
            h_prev = h_t.detach()
            self.global_step += 1

        for name in SEQUENCE_GROUPS:
            if name not in self.optimizers:
                continue
            metrics.record_norm(name, _clip(groups[name], cfg.grad_clip_norm))
            self.optimizers[name].step()
            self.update_counts[name] += 1
        return metrics

    def fit(self, sequences: Sequence[SceneSequence],
            max_steps: Optional[int] = None,
            callback: Optional[Callable[[int, StepMetrics], bool]] = None
            ) -> None:
        """Train until `max_steps` time-step updates; `callback` may return
        True to stop early (called after each batch)."""
        cfg = self.config
        limit = cfg.max_steps if max_steps is None else max_steps
        rng = np.random.default_rng(cfg.seed)
        noniter = not self.model.ablation.iterative
        torch.manual_seed(cfg.seed)
        while self.global_step < limit:
            for group in bucket_batches(sequences, cfg.batch_size, rng):
                batch = prepare_batch(group, self.model.dims.num_classes,
                                      noniterative=noniter)
                metrics = self.train_sequence_batch(batch)
                if callback is not None and callback(self.global_step, metrics):
                    return
                if self.global_step >= limit:
                    return
