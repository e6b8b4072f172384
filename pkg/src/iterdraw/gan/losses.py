"""Adversarial hinge losses, the auxiliary detection loss, and the
zero-centered gradient penalty on real data."""

from __future__ import annotations

from typing import Callable

import torch

PROB_EPS = 1e-7


def d_hinge_loss(score_real: torch.Tensor, score_fake: torch.Tensor,
                 score_wrong: torch.Tensor) -> torch.Tensor:
    """Discriminator hinge objective; the wrong term pairs a real image
    with a mismatched instruction and shares the fake margin."""
    loss_real = torch.relu(1.0 - score_real).mean()
    loss_fake = torch.relu(1.0 + score_fake).mean()
    loss_wrong = torch.relu(1.0 + score_wrong).mean()
    return loss_real + 0.5 * (loss_fake + loss_wrong)


def g_hinge_loss(score_fake: torch.Tensor, aux_loss_value: torch.Tensor | float,
                 beta: float = 20.0) -> torch.Tensor:
    """Generator objective: fool the discriminator, weighted detection term."""
    loss = -score_fake.mean()
    return loss + beta * torch.as_tensor(aux_loss_value, dtype=loss.dtype)


def aux_bce(targets: torch.Tensor, probs: torch.Tensor) -> torch.Tensor:
    """Binary cross-entropy summed over classes (mean over a batch dim if
    present). Probabilities are clamped away from 0 and 1."""
    p = probs.clamp(PROB_EPS, 1.0 - PROB_EPS)
    per_class = -(targets * torch.log(p) + (1.0 - targets) * torch.log1p(-p))
    per_example = per_class.sum(dim=-1)
    return per_example.mean()


def gradient_penalty(d_fn: Callable[[torch.Tensor], torch.Tensor],
                     real: torch.Tensor, gamma: float = 10.0) -> torch.Tensor:
    """(gamma / 2) * E[ ||grad_x D(x)||^2 ] evaluated on the real batch."""
    x = real.detach().clone().requires_grad_(True)
    scores = d_fn(x)
    if not scores.requires_grad:  # score does not depend on the input at all
        return x.new_zeros(())
    grads = torch.autograd.grad(scores.sum(), x, create_graph=True,
                                allow_unused=True)[0]
    if grads is None:
        return x.new_zeros(())
    sq_norms = grads.reshape(grads.shape[0], -1).pow(2).sum(dim=1)
    return 0.5 * gamma * sq_norms.mean()
