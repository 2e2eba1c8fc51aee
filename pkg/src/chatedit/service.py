"""HTTP session API over the dialogue loop.

Sessions live in memory, one scene and one working image each.  Turn
processing per session is serialized behind a lock (concurrent posts
queue).  On close the transcript is flushed to the log directory as a
JSON-lines file; everything the browser UI shows is reconstructable
from these endpoints alone.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from .logs import DialogueLog, act_to_json, state_snapshot, write_log
from .manager import (
    EmptyUtteranceError,
    Session,
    SessionClosedError,
    SystemTurn,
    TemplateSet,
)
from .ontology import ATTRIBUTE_NAMES
from .vision import SceneStore


class CreateSessionBody(BaseModel):
    image_id: str


class UtteranceBody(BaseModel):
    text: str


class SessionRegistry:
    """Owns the scene store and all live sessions."""

    def __init__(self, store: SceneStore, log_dir=None,
                 max_turns: Optional[int] = None,
                 templates: Optional[TemplateSet] = None):
        self.store = store
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self.max_turns = max_turns
        self.templates = templates or TemplateSet.defaults()
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create(self, image_id: str) -> Session:
        scene = self.store.get(image_id)
        session = Session(scene, templates=self.templates,
                          max_turns=self.max_turns)
        with self._registry_lock:
            self.sessions[session.session_id] = session
            self.locks[session.session_id] = threading.Lock()
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404,
                                detail=f"unknown session {session_id!r}")

    def lock(self, session_id: str) -> threading.Lock:
        return self.locks[session_id]

    def close(self, session_id: str) -> DialogueLog:
        session = self.get(session_id)
        log = session.close()
        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            write_log(log, self.log_dir / f"{session_id}.jsonl")
        return log


def _slider_positions(session: Session) -> dict:
    sliders = {name: 0 for name in ATTRIBUTE_NAMES}
    sliders.update(session.last_executed)
    return sliders


def _session_payload(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "image_id": session.scene.image_id,
        "state": state_snapshot(session.state),
        "closed": session.closed,
        "image_version": session.image_version,
        "overlay_available": session.overlay_available,
        "sliders": _slider_positions(session),
    }


def _turn_payload(session: Session, turn: SystemTurn) -> dict:
    payload = _session_payload(session)
    payload.update({
        "act": act_to_json(turn.act),
        "acts": [act_to_json(a) for a in turn.acts],
        "utterance": turn.utterance,
        "mask_overlay_present": turn.mask_overlay_present,
        "image_updated": turn.image_updated,
    })
    return payload


def _log_payload(log: DialogueLog) -> dict:
    return {
        "session_id": log.session_id,
        "image_id": log.image_id,
        "query_count": log.query_count,
        "execute_count": log.execute_count,
        "started_at": log.started_at,
        "records": [r.to_json() for r in log.records],
    }


def create_app(registry: SessionRegistry) -> FastAPI:
    app = FastAPI(title="chatedit")

    @app.get("/images")
    def list_images():
        return {"images": registry.store.image_ids()}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if body.image_id not in registry.store:
            raise HTTPException(status_code=404,
                                detail=f"unknown image {body.image_id!r}")
        session = registry.create(body.image_id)
        payload = _session_payload(session)
        payload["greeting"] = session.greeting()
        return payload

    @app.post("/sessions/{session_id}/utterances")
    def post_utterance(session_id: str, body: UtteranceBody):
        session = registry.get(session_id)
        with registry.lock(session_id):
            try:
                turn = session.step(body.text)
            except SessionClosedError:
                raise HTTPException(status_code=409, detail="session closed")
            except EmptyUtteranceError:
                raise HTTPException(status_code=400,
                                    detail="utterance must not be empty")
            if session.closed:
                registry.close(session_id)
            return _turn_payload(session, turn)

    @app.get("/sessions/{session_id}/image")
    def get_image(session_id: str, variant: str = "current"):
        session = registry.get(session_id)
        if variant == "current":
            image = session.image
        elif variant == "original":
            image = session.scene.image
        elif variant == "overlay":
            if not session.overlay_available:
                raise HTTPException(status_code=409,
                                    detail="no tracked mask to overlay")
            image = session.overlay_image()
        else:
            raise HTTPException(status_code=400,
                                detail=f"unknown variant {variant!r}")
        return Response(content=image.to_png_bytes(), media_type="image/png")

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return _session_payload(registry.get(session_id))

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str):
        return _log_payload(registry.get(session_id).current_log())

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str):
        return _log_payload(registry.close(session_id))

    return app


def build_app(fixtures, log_dir=None, max_turns: Optional[int] = None,
              template_file=None) -> FastAPI:
    """Convenience constructor from filesystem paths."""
    store = SceneStore.load(fixtures)
    templates = (TemplateSet.from_file(template_file)
                 if template_file else None)
    return create_app(SessionRegistry(store, log_dir=log_dir,
                                      max_turns=max_turns,
                                      templates=templates))
