"""HTTP facade for interactive feedback sessions.

Thin adapter over :class:`segsearch.engine.Session`: pages served over HTTP
are exactly the pages the engine would produce for the same marks.
Sessions live in memory with a TTL; the index is shared read-only.
"""
from __future__ import annotations

import io
import time
import uuid
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.exceptions import HTTPException
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .engine import (
    SCHEMES,
    STATUS_AWAITING,
    RetrievalPage,
    Session,
    SessionConfig,
)
from .evaluation import session_metrics
from .index_store import FeatureIndex

DEFAULT_SESSION_TTL = 3600.0
THUMB_MAX_DIM = 256

_SIGNATURES = (
    (b"\x89PNG\r\n\x1a\n", "image/png"),
    (b"\xff\xd8\xff", "image/jpeg"),
    (b"GIF87a", "image/gif"),
    (b"GIF89a", "image/gif"),
    (b"BM", "image/bmp"),
    (b"RIFF", "image/webp"),
)


class CreateSessionRequest(BaseModel):
    query_image_id: int
    scheme: str
    scope: int = 20
    r_max: int = 4


class FeedbackRequest(BaseModel):
    marks: dict[int, str]


@dataclass
class _LiveSession:
    session: Session
    touched: float


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _sniff_content_type(data: bytes) -> str:
    for magic, ctype in _SIGNATURES:
        if data.startswith(magic):
            return ctype
    return "application/octet-stream"


def _page_payload(page: RetrievalPage) -> dict:
    return {
        "iteration": page.iteration,
        "iterations_spanned": page.spans,
        "images": [
            {
                "id": image_id,
                "rank": rank,
                "thumb_url": f"/images/{image_id}?variant=thumb",
            }
            for rank, image_id in enumerate(page.images, start=1)
        ],
        "carried_relevant": list(page.carried_relevant),
    }


def create_app(
    index: FeatureIndex,
    session_ttl: float = DEFAULT_SESSION_TTL,
    total_iterations: int = 7,
) -> FastAPI:
    app = FastAPI(title="segsearch", version="0.1.0")
    sessions: dict[str, _LiveSession] = {}
    thumbs: dict[int, bytes] = {}

    @app.exception_handler(HTTPException)
    async def _flat_errors(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    def _purge() -> None:
        now = time.monotonic()
        stale = [sid for sid, s in sessions.items() if now - s.touched > session_ttl]
        for sid in stale:
            del sessions[sid]

    def _get_session(session_id: str) -> _LiveSession:
        _purge()
        live = sessions.get(session_id)
        if live is None:
            raise _error(404, "unknown_session", f"no session {session_id}")
        live.touched = time.monotonic()
        return live

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest) -> dict:
        _purge()
        if body.scheme not in SCHEMES:
            raise _error(422, "invalid_config", f"unknown scheme {body.scheme!r}")
        if not 0 <= body.query_image_id < len(index):
            raise _error(404, "unknown_image", f"no image {body.query_image_id}")
        try:
            config = SessionConfig(
                scope=body.scope, r_max=body.r_max, total_iterations=total_iterations
            )
            session = Session(index, body.query_image_id, body.scheme, config)
        except ValueError as exc:
            raise _error(422, "invalid_config", str(exc))
        page = session.start()
        session_id = uuid.uuid4().hex
        sessions[session_id] = _LiveSession(session=session, touched=time.monotonic())
        return {"session_id": session_id, "page": _page_payload(page)}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        live = _get_session(session_id)
        session = live.session
        state = session.state
        page = session.current_page
        return {
            "session_id": session_id,
            "scheme": session.scheme,
            "status": session.status,
            "config": {
                "scope": session.config.scope,
                "r_max": session.config.r_max,
                "total_iterations": session.config.total_iterations,
                "eps": session.config.eps,
                "seed": session.config.seed,
                "ranking": session.config.ranking,
            },
            "state": {
                "query_id": state.query_id,
                "relevant": sorted(state.relevant),
                "nonrelevant": sorted(state.nonrelevant),
                "shown": list(state.shown),
                "iteration": session.iterations_used,
                "weights": [float(w) for w in state.weights],
            },
            "page": _page_payload(page) if page is not None else None,
        }

    @app.post("/sessions/{session_id}/feedback")
    def submit_feedback(session_id: str, body: FeedbackRequest) -> dict:
        live = _get_session(session_id)
        session = live.session
        if session.status != STATUS_AWAITING:
            raise _error(
                409, "not_awaiting", f"session is {session.status}, not awaiting feedback"
            )
        page = session.current_page
        assert page is not None
        bad = {v for v in body.marks.values()} - {"relevant", "nonrelevant"}
        if bad:
            raise _error(422, "invalid_marks", f"marks must be relevant/nonrelevant, got {sorted(bad)}")
        if set(body.marks) != set(page.images):
            missing = sorted(set(page.images) - set(body.marks))
            extra = sorted(set(body.marks) - set(page.images))
            raise _error(
                409,
                "incomplete_marks",
                f"marks must cover the current page exactly (missing {missing}, unknown {extra})",
            )
        marks = {i: v == "relevant" for i, v in body.marks.items()}
        next_page = session.submit(marks)
        return {
            "session_id": session_id,
            "status": session.status,
            "page": _page_payload(next_page) if next_page is not None else None,
        }

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str) -> dict:
        live = _get_session(session_id)
        session = live.session
        category = index.images[session.state.query_id].category
        rows = session_metrics(session.transcript(), index.category_size(category))
        return {
            "session_id": session_id,
            "iterations": [
                {
                    "iteration": r["iteration"],
                    "shown": r["shown"],
                    "relevant": r["relevant"],
                    "precision": r["precision"],
                    "recall": r["recall"],
                    "re": r["re"],
                    "fd": r["fd"],
                }
                for r in rows
            ],
        }

    @app.get("/images/{image_id}")
    def get_image(image_id: int, variant: str = "full") -> Response:
        if not 0 <= image_id < len(index):
            raise _error(404, "unknown_image", f"no image {image_id}")
        if variant not in ("full", "thumb"):
            raise _error(422, "invalid_variant", f"unknown variant {variant!r}")
        path = index.images[image_id].path
        try:
            data = open(path, "rb").read()
        except OSError as exc:
            raise _error(404, "missing_file", f"cannot read {path}: {exc}")
        if variant == "full":
            return Response(content=data, media_type=_sniff_content_type(data))
        cached = thumbs.get(image_id)
        if cached is None:
            from PIL import Image

            with Image.open(io.BytesIO(data)) as img:
                img = img.convert("RGB")
                img.thumbnail((THUMB_MAX_DIM, THUMB_MAX_DIM))
                buf = io.BytesIO()
                img.save(buf, format="PNG")
            cached = buf.getvalue()
            thumbs[image_id] = cached
        return Response(content=cached, media_type="image/png")

    return app
