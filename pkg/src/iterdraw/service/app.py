"""HTTP/JSON façade over the session manager."""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .sessions import SessionError, SessionManager


class CreateSessionRequest(BaseModel):
    checkpoint: Optional[str] = None
    initial_image_b64: Optional[str] = None
    seed: int = 0


class StepRequest(BaseModel):
    instruction: str


def create_app(default_checkpoint: Optional[str] = None,
               manager: Optional[SessionManager] = None) -> FastAPI:
    app = FastAPI(title="iterdraw session service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    mgr = manager or SessionManager(default_checkpoint)
    app.state.manager = mgr

    @app.exception_handler(SessionError)
    async def session_error_handler(_: Request, err: SessionError):
        return JSONResponse(status_code=err.status, content={"detail": str(err)})

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        session = mgr.create(checkpoint=req.checkpoint,
                             initial_image_b64=req.initial_image_b64,
                             seed=req.seed)
        return {"session_id": session.id}

    @app.post("/sessions/{session_id}/steps")
    def step(session_id: str, req: StepRequest):
        turn_index, image_b64 = mgr.step(session_id, req.instruction)
        return {"turn_index": turn_index, "image_b64": image_b64}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return {"session_id": session_id, "history": mgr.history(session_id)}

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        return {"turns": mgr.undo(session_id)}

    @app.delete("/sessions/{session_id}")
    def delete(session_id: str):
        mgr.delete(session_id)
        return {"deleted": True}

    return app
