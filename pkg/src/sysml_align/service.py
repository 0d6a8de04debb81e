"""Local HTTP API for the review UI.

Loopback desk tool: no authentication, one session per server. Reads are
lock-free against the persisted state; every mutation takes the session's
exclusive transition lock non-blockingly: a concurrent mutation gets 409.

Envelope: {"ok": true, "data": ...} or {"ok": false, "error": {"code", "message"}}
with error codes drawn from the CLI exit-code taxonomy (usage, validation,
provider, gating).
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from filelock import Timeout

from .diagnostics import DiagnosticError
from .jsonutil import read_json
from .session import (
    GatingError,
    ProviderFailure,
    Session,
    ValidationFailure,
    session_lock,
)

ARTIFACT_WHITELIST = (
    "session.json",
    "extension_demo.sysml",
    "oem.ir.json",
    "supplier.ir.json",
    "extraction_report.json",
    "candidates.json",
    "provider_request.json",
    "mappings.json",
    "conflicts.json",
    "IntegratedModel_Alignment.sysml",
    "diagnosis.json",
    "coverage.json",
)


class _Busy(Exception):
    pass


class SessionStore:
    """One session directory; serialized mutations, snapshot reads."""

    def __init__(self, directory: Path):
        self.dir = Path(directory)
        self._mutex = threading.Lock()

    def read(self) -> Session:
        return Session.load(self.dir)

    def mutate(self, fn):
        if not self._mutex.acquire(blocking=False):
            raise _Busy()
        try:
            lock = session_lock(self.dir)
            try:
                lock.acquire(timeout=0)
            except Timeout:
                raise _Busy() from None
            try:
                session = Session.load(self.dir)
                return fn(session)
            finally:
                lock.release()
        finally:
            self._mutex.release()


def _ok(data) -> JSONResponse:
    return JSONResponse({"ok": True, "data": data})


def _err(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"ok": False, "error": {"code": code, "message": message}}, status_code=status)


def create_app(session_dir: Path, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="sysml-align service", docs_url=None, redoc_url=None)
    store = SessionStore(session_dir)

    @app.exception_handler(_Busy)
    async def busy_handler(request: Request, exc: _Busy):
        return _err(409, "gating", "another transition is in progress")

    @app.exception_handler(GatingError)
    async def gating_handler(request: Request, exc: GatingError):
        return _err(409, "gating", str(exc))

    @app.exception_handler(ValidationFailure)
    async def validation_handler(request: Request, exc: ValidationFailure):
        return _err(422, "validation", str(exc))

    @app.exception_handler(DiagnosticError)
    async def diag_handler(request: Request, exc: DiagnosticError):
        return _err(422, "validation", str(exc))

    @app.exception_handler(ProviderFailure)
    async def provider_handler(request: Request, exc: ProviderFailure):
        return _err(502, "provider", str(exc))

    @app.get("/api/session")
    def get_session():
        session = store.read()
        return _ok(
            {
                "id": session.state["id"],
                "created_at": session.state["created_at"],
                "input_digests": session.state["input_digests"],
                "config": session.state["config"],
                "stages": session.status_rows(),
            }
        )

    @app.get("/api/stages/{k}")
    def get_stage(k: int):
        session = store.read()
        if not 0 <= k < 7:
            return _err(404, "usage", f"no stage {k}")
        stage = session.stage(k)
        return _ok({"stage": k, **stage})

    @app.post("/api/stages/{k}/run")
    def run_stage(k: int):
        def do(session: Session):
            session.run_stage(k)
            return session.stage(k)

        stage = store.mutate(do)
        return _ok({"stage": k, "status": stage["status"], "artifacts": stage["artifacts"]})

    @app.post("/api/stages/{k}/confirm")
    async def confirm_stage(k: int, request: Request):
        body = await _body(request)

        def do(session: Session):
            session.confirm_stage(
                k,
                feedback=body.get("message"),
                acknowledge_unprocessed=bool(body.get("acknowledge_unprocessed")),
            )
            return session.stage(k)

        stage = store.mutate(do)
        return _ok({"stage": k, "status": stage["status"]})

    @app.post("/api/stages/{k}/reject")
    async def reject_stage(k: int, request: Request):
        body = await _body(request)
        message = body.get("message")
        if not message:
            return _err(422, "validation", "rejection requires a message")

        def do(session: Session):
            session.reject_stage(k, message)
            return session.stage(k)

        stage = store.mutate(do)
        return _ok({"stage": k, "status": stage["status"]})

    @app.post("/api/stages/{k}/reopen")
    def reopen_stage(k: int):
        def do(session: Session):
            session.reopen_stage(k)
            return session.stage(k)

        stage = store.mutate(do)
        return _ok({"stage": k, "status": stage["status"]})

    @app.get("/api/candidates")
    def get_candidates():
        session = store.read()
        path = session.dir / "candidates.json"
        if not path.is_file():
            return _err(404, "usage", "candidates.json not produced yet (run Stage 2)")
        data = read_json(path)
        mappings_path = session.dir / "mappings.json"
        if mappings_path.is_file():
            doc = read_json(mappings_path)
            by_key = {(m["candidate"]["source_uid"], m["candidate"]["target_uid"]): m for m in doc["mappings"]}
            for candidate in data["candidates"]:
                mapping = by_key.get((candidate["source_uid"], candidate["target_uid"]))
                if mapping:
                    candidate["mapping"] = {
                        "mapping_id": mapping["mapping_id"],
                        "construct": mapping["construct"],
                        "proposed_tag": mapping["proposed_tag"],
                        "effective_tag": mapping["effective_tag"],
                        "checks": mapping["checks"],
                        "verdict": mapping["verdict"],
                    }
            data["explicitly_unmatched"] = doc.get("explicitly_unmatched", [])
        return _ok(data)

    @app.post("/api/mappings/{mapping_id}/verdict")
    async def post_verdict(mapping_id: str, request: Request):
        body = await _body(request)
        status = body.get("status")
        if status not in ("Accepted", "Rejected", "Modified"):
            return _err(422, "validation", f"invalid verdict status {status!r}")

        def do(session: Session):
            session.apply_verdict(mapping_id, status, tag=body.get("tag"), note=body.get("note"))
            return None

        store.mutate(do)
        return _ok({"mapping_id": mapping_id, "status": status})

    @app.post("/api/elements/{uid}/unmatch")
    async def post_unmatch(uid: str, request: Request):
        body = await _body(request)

        def do(session: Session):
            session.mark_unmatched(uid, note=body.get("note"))
            return None

        store.mutate(do)
        return _ok({"uid": uid})

    @app.get("/api/coverage")
    def get_coverage():
        return _artifact_json(store, "coverage.json", "run Stage 5 first")

    @app.get("/api/diagnosis")
    def get_diagnosis():
        return _artifact_json(store, "diagnosis.json", "run Stage 5 first")

    @app.get("/api/artifacts/{name}")
    def get_artifact(name: str):
        if name not in ARTIFACT_WHITELIST:
            return _err(404, "usage", f"unknown artifact '{name}'")
        path = store.dir / name
        if not path.is_file():
            return _err(404, "usage", f"artifact '{name}' not produced yet")
        text = path.read_text(encoding="utf-8")
        if name.endswith(".json"):
            return JSONResponse(read_json(path))
        return PlainTextResponse(text)

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _artifact_json(store: SessionStore, name: str, hint: str):
    path = store.dir / name
    if not path.is_file():
        return _err(404, "usage", f"{name} not produced yet ({hint})")
    return _ok(read_json(path))


async def _body(request: Request) -> dict:
    try:
        data = await request.json()
        return data if isinstance(data, dict) else {}
    except Exception:
        return {}
