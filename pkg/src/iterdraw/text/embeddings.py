"""Pretrained word-embedding tables with a reserved unk row.

Files use the standard text format: one token followed by its vector per
line. Out-of-vocabulary lookups resolve to the unk row (row 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

UNK_ID = 0
UNK_TOKEN = "unk"

EMBEDDING_DIM = 300


class EmbeddingFormatError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    vocab: Dict[str, int]  # token -> row; row 0 is unk
    matrix: np.ndarray     # (len(vocab) + 1, dim) float32

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def lookup(self, token: str) -> int:
        return self.vocab.get(token.lower(), UNK_ID)

    def ids(self, tokens: Sequence[str]) -> List[int]:
        return [self.lookup(t) for t in tokens]


def load_embeddings(path: Path, dim: int = EMBEDDING_DIM) -> EmbeddingTable:
    """Parse a token-per-line embedding file, enforcing the vector dimension.

    If the file carries a literal "unk" token its vector becomes the unk
    row; otherwise the unk row is the mean of all vectors.
    """
    vocab: Dict[str, int] = {}
    rows: List[np.ndarray] = []
    unk_vector = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) <= 1:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise EmbeddingFormatError(
                    f"line {lineno}: expected {dim} floats, got {len(values)}")
            vector = np.asarray([float(v) for v in values], dtype=np.float32)
            if token == UNK_TOKEN:
                unk_vector = vector
                continue
            if token in vocab:
                continue
            vocab[token] = len(rows) + 1
            rows.append(vector)
    if not rows and unk_vector is None:
        raise EmbeddingFormatError(f"no embedding rows found in {path}")
    if unk_vector is None:
        unk_vector = np.mean(rows, axis=0) if rows else np.zeros(dim, np.float32)
    matrix = np.vstack([unk_vector[None, :]] + [r[None, :] for r in rows])
    return EmbeddingTable(vocab=vocab, matrix=matrix.astype(np.float32))


def random_table(tokens: Sequence[str], dim: int = EMBEDDING_DIM,
                 seed: int = 0) -> EmbeddingTable:
    """Deterministic stand-in table for runs without a pretrained file."""
    uniq = sorted(set(t.lower() for t in tokens) - {UNK_TOKEN})
    rng = np.random.default_rng(seed)
    matrix = rng.normal(0.0, 0.4, size=(len(uniq) + 1, dim)).astype(np.float32)
    vocab = {tok: i + 1 for i, tok in enumerate(uniq)}
    return EmbeddingTable(vocab=vocab, matrix=matrix)
