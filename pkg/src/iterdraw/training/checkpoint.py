"""Single-archive checkpoints carrying weights, dims, ablation flags,
vocabulary, and the training step counter."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import torch

from ..gan.config import AblationConfig, ModelDims
from ..gan.model import DrawerModel
from ..text.embeddings import EmbeddingTable

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


class IncompatibleCheckpointError(CheckpointError):
    pass


@dataclass
class CheckpointBundle:
    model: DrawerModel
    step: int
    background: Optional[np.ndarray] = None
    optimizer_state: Optional[Dict] = None


def save_checkpoint(path: Path, model: DrawerModel, step: int = 0,
                    background: Optional[np.ndarray] = None,
                    optimizers: Optional[Dict[str, torch.optim.Optimizer]] = None
                    ) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "dims": model.dims.to_dict(),
        "ablation": model.ablation.to_dict(),
        "step": int(step),
        "vocab": dict(model.table.vocab),
        "embed_matrix": torch.from_numpy(np.array(model.table.matrix)),
        "model_state": model.state_dict(),
        "background": None if background is None
                      else torch.from_numpy(np.array(background)),
        "optimizer_state": {name: opt.state_dict()
                            for name, opt in optimizers.items()}
                           if optimizers else None,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path: Path,
                    expected_num_classes: Optional[int] = None
                    ) -> CheckpointBundle:
    try:
        payload = torch.load(Path(path), map_location="cpu", weights_only=True)
    except Exception as err:
        raise CheckpointError(f"cannot read checkpoint {path}: {err}") from err
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise IncompatibleCheckpointError(
            f"checkpoint format {version!r}, expected {FORMAT_VERSION}")
    dims = ModelDims.from_dict(payload["dims"])
    if expected_num_classes is not None and dims.num_classes != expected_num_classes:
        raise IncompatibleCheckpointError(
            f"checkpoint has {dims.num_classes} classes, "
            f"expected {expected_num_classes}")
    ablation = AblationConfig.from_dict(payload["ablation"])
    table = EmbeddingTable(vocab=payload["vocab"],
                           matrix=payload["embed_matrix"].numpy())
    model = DrawerModel(dims, ablation, table)
    model.load_state_dict(payload["model_state"])
    model.eval()
    background = payload.get("background")
    if background is not None:
        background = background.numpy()
    return CheckpointBundle(model=model, step=payload["step"],
                            background=background,
                            optimizer_state=payload.get("optimizer_state"))
