"""Training hyperparameters and the flat key/value config file format."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Tuple


@dataclass(frozen=True)
class TrainConfig:
    lr_d: float = 0.0004
    lr_g: float = 0.0001
    lr_text: float = 0.003
    lr_r: float = 0.0003
    lr_img_enc: float = 0.006
    adam_betas: Tuple[float, float] = (0.0, 0.9)
    weight_decay: float = 0.0
    grad_clip_norm: float = 50.0
    batch_size: int = 32
    beta: float = 20.0    # auxiliary detection loss weight
    gamma: float = 10.0   # gradient penalty weight
    ca_kl: float = 0.0    # optional KL weight on conditioning augmentation
    max_steps: int = 10000
    checkpoint_every: int = 1000
    eval_every: int = 250
    seed: int = 0
    embeddings_path: Optional[str] = None  # pretrained word vectors (text format)

    def __post_init__(self):
        for name in ("lr_d", "lr_g", "lr_text", "lr_r", "lr_img_enc"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.grad_clip_norm <= 0:
            raise ValueError("grad_clip_norm must be > 0")


def load_train_config(path: Path) -> TrainConfig:
    """Parse `key = value` lines; '#' starts a comment."""
    overrides = {}
    known = {f.name: f.type for f in fields(TrainConfig)}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key == "adam_betas":
            parts = [float(v) for v in value.split(",")]
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: adam_betas needs two floats")
            overrides[key] = tuple(parts)
        elif key == "embeddings_path":
            overrides[key] = value
        elif key in ("batch_size", "max_steps", "checkpoint_every",
                     "eval_every", "seed"):
            overrides[key] = int(value)
        else:
            overrides[key] = float(value)
    return TrainConfig(**overrides)
