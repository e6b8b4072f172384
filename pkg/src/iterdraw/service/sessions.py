"""In-memory interactive drawing sessions over a fixed checkpoint.

Session state is a pure function of (checkpoint, initial image,
instruction list, per-session seed): stepping and replaying share one
`advance` routine, so undo-by-replay is bit-exact with the original run.
"""

from __future__ import annotations

import base64
import io
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch
from PIL import Image

from ..codraw.ingest import tokenize
from ..core.types import ImageGrid
from ..gan.model import DrawerModel, image_to_tensor, sample_noise, tensor_to_image
from ..iclevr.config import BACKGROUND_RGB
from ..training.checkpoint import CheckpointBundle, load_checkpoint


class SessionError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


def encode_png_b64(values: np.ndarray) -> str:
    image = ImageGrid(np.asarray(values, dtype=np.float32))
    buf = io.BytesIO()
    Image.fromarray(image.to_pixels(), mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def decode_png_b64(data: str) -> np.ndarray:
    raw = base64.b64decode(data)
    with Image.open(io.BytesIO(raw)) as im:
        pixels = np.asarray(im.convert("RGB"))
    return ImageGrid.from_pixels(pixels).values


@dataclass
class Session:
    id: str
    checkpoint_path: str
    seed: int
    initial_canvas: torch.Tensor          # (1, 3, S, S)
    h: torch.Tensor                       # (1, n_c)
    canvas: torch.Tensor                  # (1, 3, S, S)
    history: List[Tuple[str, str]] = field(default_factory=list)
    created_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)


def advance(model: DrawerModel, h: torch.Tensor, canvas: torch.Tensor,
            tokens: List[str], z: torch.Tensor
            ) -> Tuple[torch.Tensor, torch.Tensor]:
    """One deterministic generation step; returns (new h, new canvas)."""
    with torch.no_grad():
        ids, lengths = model.tokens_to_ids([tokens])
        d = model.encode_instruction(ids, lengths)
        h_next = model.update_context(d, h)
        ca = model.augment_condition(h_next, torch.zeros(1, model.dims.n_c))
        f_prev = model.encode_canvas(canvas)
        new_canvas = model.generate_step(z, ca.c_aug, h_next, f_prev)
    return h_next, new_canvas


class SessionManager:
    def __init__(self, default_checkpoint: Optional[str] = None):
        self.default_checkpoint = default_checkpoint
        self._bundles: Dict[str, CheckpointBundle] = {}
        self._sessions: Dict[str, Session] = {}
        self._lock = threading.Lock()

    # -- checkpoint cache ----------------------------------------------------

    def _bundle(self, checkpoint_path: Optional[str]) -> Tuple[str, CheckpointBundle]:
        path = checkpoint_path or self.default_checkpoint
        if path is None:
            raise SessionError("no checkpoint configured", status=400)
        with self._lock:
            if path not in self._bundles:
                try:
                    bundle = load_checkpoint(path)
                except Exception as err:
                    raise SessionError(f"cannot load checkpoint: {err}",
                                       status=400) from err
                bundle.model.eval()
                self._bundles[path] = bundle
            return path, self._bundles[path]

    def _default_canvas(self, bundle: CheckpointBundle) -> torch.Tensor:
        side = bundle.model.dims.image_side
        if bundle.background is not None:
            return image_to_tensor(bundle.background).unsqueeze(0)
        background = ImageGrid.uniform(side, BACKGROUND_RGB)
        return image_to_tensor(background.values).unsqueeze(0)

    # -- session operations ---------------------------------------------------

    def create(self, checkpoint: Optional[str] = None,
               initial_image_b64: Optional[str] = None, seed: int = 0) -> Session:
        path, bundle = self._bundle(checkpoint)
        side = bundle.model.dims.image_side
        if initial_image_b64 is not None:
            try:
                values = decode_png_b64(initial_image_b64)
            except Exception as err:
                raise SessionError(f"invalid image payload: {err}",
                                   status=422) from err
            if values.shape[0] != side or values.shape[1] != side:
                raise SessionError(
                    f"initial image must be {side}x{side}, "
                    f"got {values.shape[0]}x{values.shape[1]}", status=422)
            canvas = image_to_tensor(values).unsqueeze(0)
        else:
            canvas = self._default_canvas(bundle)
        session = Session(id=uuid.uuid4().hex, checkpoint_path=path, seed=seed,
                          initial_canvas=canvas.clone(),
                          h=bundle.model.initial_context(1),
                          canvas=canvas.clone())
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise SessionError(f"unknown session {session_id}", status=404)
        return session

    def step(self, session_id: str, instruction: str) -> Tuple[int, str]:
        session = self.get(session_id)
        tokens = tokenize(instruction)
        if not tokens:
            raise SessionError("instruction must be non-empty", status=400)
        _, bundle = self._bundle(session.checkpoint_path)
        with session.lock:
            turn_index = len(session.history) + 1
            z = sample_noise(bundle.model.dims.n_z, 1, session.seed, turn_index)
            session.h, session.canvas = advance(bundle.model, session.h,
                                                session.canvas, tokens, z)
            image_b64 = encode_png_b64(tensor_to_image(session.canvas[0]))
            session.history.append((instruction, image_b64))
        return turn_index, image_b64

    def undo(self, session_id: str) -> int:
        session = self.get(session_id)
        _, bundle = self._bundle(session.checkpoint_path)
        with session.lock:
            if not session.history:
                raise SessionError("nothing to undo", status=409)
            remaining = [instr for instr, _ in session.history[:-1]]
            h = bundle.model.initial_context(1)
            canvas = session.initial_canvas.clone()
            history: List[Tuple[str, str]] = []
            for turn_index, instruction in enumerate(remaining, start=1):
                z = sample_noise(bundle.model.dims.n_z, 1, session.seed,
                                 turn_index)
                h, canvas = advance(bundle.model, h, canvas,
                                    tokenize(instruction), z)
                history.append((instruction,
                                encode_png_b64(tensor_to_image(canvas[0]))))
            session.h = h
            session.canvas = canvas
            session.history = history
            return len(history)

    def delete(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._sessions:
                raise SessionError(f"unknown session {session_id}", status=404)
            del self._sessions[session_id]

    def history(self, session_id: str) -> List[Dict]:
        session = self.get(session_id)
        with session.lock:
            return [
                {"turn_index": i, "instruction": instr, "image_b64": img}
                for i, (instr, img) in enumerate(session.history, start=1)
            ]

    # -- optional JSON persistence --------------------------------------------

    def save_snapshot(self, path) -> None:
        """Persist all sessions as JSON; images are reconstructed on load."""
        import json
        with self._lock:
            sessions = list(self._sessions.values())
        doc = []
        for session in sessions:
            with session.lock:
                doc.append({
                    "id": session.id,
                    "checkpoint": session.checkpoint_path,
                    "seed": session.seed,
                    "created_at": session.created_at,
                    "initial_canvas_b64": encode_png_b64(
                        tensor_to_image(session.initial_canvas[0])),
                    "instructions": [instr for instr, _ in session.history],
                })
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)

    def load_snapshot(self, path) -> int:
        """Restore sessions by replaying their instruction lists."""
        import json
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        for record in doc:
            _, bundle = self._bundle(record["checkpoint"])
            canvas = image_to_tensor(
                decode_png_b64(record["initial_canvas_b64"])).unsqueeze(0)
            session = Session(id=record["id"],
                              checkpoint_path=record["checkpoint"],
                              seed=record["seed"],
                              initial_canvas=canvas.clone(),
                              h=bundle.model.initial_context(1),
                              canvas=canvas.clone(),
                              created_at=record["created_at"])
            for turn_index, instruction in enumerate(record["instructions"],
                                                     start=1):
                z = sample_noise(bundle.model.dims.n_z, 1, session.seed,
                                 turn_index)
                session.h, session.canvas = advance(
                    bundle.model, session.h, session.canvas,
                    tokenize(instruction), z)
                session.history.append((
                    instruction,
                    encode_png_b64(tensor_to_image(session.canvas[0]))))
            with self._lock:
                self._sessions[session.id] = session
        return len(doc)
