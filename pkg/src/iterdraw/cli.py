"""Umbrella command line: dataset synthesis, ingest, training, evaluation,
sampling, and the HTTP service."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .codraw.ingest import catalog_from_names
from .codraw.ingest import ingest as ingest_codraw_archive
from .core.datasets import load_catalog, read_dataset, save_png
from .evaluation.detector import (evaluate_detector, load_detector,
                                  save_detector, train_detector)
from .evaluation.harness import evaluate_model
from .gan.config import ABLATIONS, ModelDims
from .gan.model import DrawerModel
from .iclevr.config import GenConfig
from .iclevr.generate import generate_dataset
from .text.embeddings import load_embeddings, random_table
from .training.checkpoint import load_checkpoint, save_checkpoint
from .training.config import TrainConfig, load_train_config
from .training.loop import Trainer
from .training.rollout import evaluate_rollout


@click.group()
def main():
    """Iterative text-conditioned scene drawing."""


@main.command("gen-data")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=0, type=int)
@click.option("--scale", default=1.0, type=float,
              help="Multiplier on the 6000/2000/2000 split sizes.")
@click.option("--canvas", default=128, type=int)
@click.option("--min-dist", default=20.0, type=float)
def gen_data(out: Path, seed: int, scale: float, canvas: int, min_dist: float):
    """Synthesize an instruction/image dataset."""
    margin = max(2.0, round(canvas * 12 / 128))
    config = GenConfig(canvas_side=canvas, min_distance=min_dist,
                       margin=margin, seed=seed).with_scale(scale)
    summary = generate_dataset(config, out)
    click.echo(json.dumps(summary))


@main.command("ingest-codraw")
@click.option("--raw", "raw_path", required=True, type=click.Path(path_type=Path))
@click.option("--images", "images_dir", required=True,
              type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--canvas", default=128, type=int)
def ingest_codraw(raw_path: Path, images_dir: Path, out: Path, canvas: int):
    """Transform a raw Teller/Drawer archive into the canonical layout."""
    doc = json.loads(Path(raw_path).read_text(encoding="utf-8"))
    names = doc.get("object_names")
    if not names:
        raise click.ClickException("raw archive must list object_names")
    catalog = catalog_from_names(names, canvas)
    summary = ingest_codraw_archive(raw_path, images_dir, out, catalog)
    click.echo(json.dumps(summary))


def _build_model(data_dir: Path, ablation_name: str, embeddings: Path | None,
                 width: int, context_dim: int, seed: int) -> tuple:
    catalog = load_catalog(data_dir)
    sequences = read_dataset(data_dir, split="train")
    if not sequences:
        raise click.ClickException("train split is empty")
    side = catalog.canvas_side
    if side == 128 and width >= 64 and context_dim >= 1024:
        dims = ModelDims(num_classes=catalog.num_classes)
    else:
        dims = ModelDims.scaled(image_side=side, num_classes=catalog.num_classes,
                                n_c=context_dim, gen_width=width,
                                disc_width=width)
    if embeddings is not None:
        table = load_embeddings(embeddings)
    else:
        tokens = [tok for seq in sequences for turn in seq.turns
                  for tok in turn.instruction_tokens]
        table = random_table(tokens, seed=seed)
    ablation = ABLATIONS[ablation_name]
    model = DrawerModel(dims, ablation, table)
    return model, sequences, catalog


@main.command("train")
@click.option("--data", "data_dir", required=True, type=click.Path(path_type=Path))
@click.option("--config", "config_path", type=click.Path(path_type=Path))
@click.option("--ablation", default="dsubtract",
              type=click.Choice(sorted(ABLATIONS)))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--embeddings", type=click.Path(path_type=Path))
@click.option("--width", default=24, type=int)
@click.option("--context-dim", default=256, type=int)
def train(data_dir: Path, config_path: Path | None, ablation: str, out: Path,
          embeddings: Path | None, width: int, context_dim: int):
    """Train a drawer on a dataset directory."""
    config = load_train_config(config_path) if config_path else TrainConfig()
    if embeddings is None and config.embeddings_path is not None:
        embeddings = Path(config.embeddings_path)
    model, sequences, _ = _build_model(data_dir, ablation, embeddings,
                                       width, context_dim, config.seed)
    trainer = Trainer(model, config)
    out.mkdir(parents=True, exist_ok=True)
    background = sequences[0].background.values

    def checkpoint_cb(step: int, metrics) -> bool:
        click.echo(f"step {step}: d={metrics.d_loss[-1]:.3f} "
                   f"g={metrics.g_loss[-1]:.3f}")
        if step and step % config.checkpoint_every == 0:
            save_checkpoint(out / f"step{step:07d}.pt", model, step=step,
                            background=background,
                            optimizers=trainer.optimizers)
        return False

    trainer.fit(sequences, callback=checkpoint_cb)
    save_checkpoint(out / "final.pt", model, step=trainer.global_step,
                    background=background, optimizers=trainer.optimizers)
    click.echo(f"saved {out / 'final.pt'}")


@main.command("train-detector")
@click.option("--data", "data_dir", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--epochs", default=12, type=int)
@click.option("--seed", default=0, type=int)
def train_detector_cmd(data_dir: Path, out: Path, epochs: int, seed: int):
    """Train the object detector/localizer on a dataset's train split."""
    catalog = load_catalog(data_dir)
    train_split = read_dataset(data_dir, split="train")
    detector = train_detector(train_split, catalog, epochs=epochs, seed=seed)
    held_out = read_dataset(data_dir, split="valid")
    if held_out:
        scores = evaluate_detector(detector, held_out, catalog)
        click.echo(json.dumps(scores))
    save_detector(detector, out)


@main.command("eval")
@click.option("--checkpoint", required=True, type=click.Path(path_type=Path))
@click.option("--data", "data_dir", required=True, type=click.Path(path_type=Path))
@click.option("--detector", "detector_path", required=True,
              type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--split", default="test")
def eval_cmd(checkpoint: Path, data_dir: Path, detector_path: Path, out: Path,
             split: str):
    """Score a checkpoint on a dataset split."""
    catalog = load_catalog(data_dir)
    sequences = read_dataset(data_dir, split=split)
    bundle = load_checkpoint(checkpoint,
                             expected_num_classes=catalog.num_classes)
    detector = load_detector(detector_path)
    report = evaluate_model(bundle.model, sequences, detector,
                            canvas_side=catalog.canvas_side)
    Path(out).write_text(report.to_json(), encoding="utf-8")
    click.echo(f"precision={report.precision:.4f} recall={report.recall:.4f} "
               f"f1={report.f1:.4f} rel_sim={report.rel_sim:.4f}")


@main.command("sample")
@click.option("--checkpoint", required=True, type=click.Path(path_type=Path))
@click.option("--data", "data_dir", required=True, type=click.Path(path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--split", default="test")
@click.option("--count", default=4, type=int)
@click.option("--seed", default=0, type=int)
def sample(checkpoint: Path, data_dir: Path, out: Path, split: str, count: int,
           seed: int):
    """Roll out a few sequences and write the generated turn images."""
    sequences = read_dataset(data_dir, split=split)[:count]
    bundle = load_checkpoint(checkpoint)
    out.mkdir(parents=True, exist_ok=True)
    for seq in sequences:
        images = evaluate_rollout(bundle.model, seq, seed=seed)
        for t, image in enumerate(images, start=1):
            save_png(image, out / seq.id / f"turn{t}.png")
    click.echo(f"wrote rollouts for {len(sequences)} sequences to {out}")


@main.command("serve")
@click.option("--checkpoint", required=True, type=click.Path(path_type=Path))
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
def serve(checkpoint: Path, port: int, host: str):
    """Run the interactive session service."""
    import uvicorn

    from .service.app import create_app

    load_checkpoint(checkpoint)  # fail fast on a bad file
    app = create_app(default_checkpoint=str(checkpoint))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
