"""HTTP interface for the operator console.

JSON routes behind bearer-token sessions: login/logout, latest capture,
archive listing and deletion, password change, contact management, and the
image bytes themselves. The built web console bundle, when present, is
served statically at the root.

Sessions are random 128-bit tokens with a sliding expiry; every route except
login demands one.
"""
from __future__ import annotations

import re
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Request, Response
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, field_validator

from .sms import PHONE_PATTERN
from .store import NotFoundError, PhotoRecord, Store, ValidationError

SESSION_TTL_S = 30 * 60

_IMAGE_NAME = re.compile(r"^[A-Za-z0-9._-]+\.jpg$")


@dataclass
class Session:
    token: str
    account_id: int
    expires_at: float


class SessionTable:
    """Token -> session map, safe under concurrent requests."""

    def __init__(self, ttl_s: float = SESSION_TTL_S):
        self.ttl_s = ttl_s
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def create(self, account_id: int) -> Session:
        token = secrets.token_urlsafe(16)  # 128 bits
        session = Session(token=token, account_id=account_id, expires_at=time.time() + self.ttl_s)
        with self._lock:
            self._sessions[token] = session
        return session

    def validate(self, token: str) -> Optional[Session]:
        """Return the live session and slide its expiry, or None."""
        now = time.time()
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                return None
            if now >= session.expires_at:
                del self._sessions[token]
                return None
            session.expires_at = now + self.ttl_s
            return session

    def revoke(self, token: str) -> None:
        with self._lock:
            self._sessions.pop(token, None)


class LoginRequest(BaseModel):
    username: str
    password: str


class PasswordChange(BaseModel):
    old: str
    new: str
    confirm: str


class NewContact(BaseModel):
    contact_no: str

    @field_validator("contact_no")
    @classmethod
    def _must_look_like_number(cls, value: str) -> str:
        if not PHONE_PATTERN.match(value):
            raise ValueError("not a phone number")
        return value


def _photo_json(record: PhotoRecord) -> dict:
    return {
        "id": record.id,
        "image": record.photo_name.rpartition("/")[2],
        "time": record.photo_time,
        "date": record.photo_date,
    }


def create_app(
    store: Store,
    archive_dir: Path,
    session_ttl_s: float = SESSION_TTL_S,
    ui_dist: Optional[Path] = None,
) -> FastAPI:
    """Assemble the application around an open store.

    ``archive_dir`` is the directory holding archived JPEGs (served under
    /images); ``ui_dist`` optionally points at the built console bundle.
    """
    app = FastAPI(title="sentinel console", docs_url=None, redoc_url=None)
    sessions = SessionTable(ttl_s=session_ttl_s)
    app.state.sessions = sessions
    archive_dir = Path(archive_dir)

    def current_session(request: Request) -> Session:
        header = request.headers.get("authorization", "")
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not token:
            raise HTTPException(status_code=401, detail="missing bearer token")
        session = sessions.validate(token.strip())
        if session is None:
            raise HTTPException(status_code=401, detail="invalid or expired session")
        return session

    @app.post("/api/login")
    def login(body: LoginRequest):
        account = store.verify_login(body.username, body.password)
        if account is None:
            raise HTTPException(status_code=401, detail="wrong username or password")
        session = sessions.create(account.id)
        return {"token": session.token}

    @app.post("/api/logout")
    def logout(request: Request, session: Session = Depends(current_session)):
        sessions.revoke(session.token)
        return {"ok": True}

    @app.get("/api/photos/latest")
    def latest_photo(session: Session = Depends(current_session)):
        record = store.latest_photo()
        if record is None:
            return Response(status_code=204)
        return _photo_json(record)

    @app.get("/api/photos")
    def list_photos(session: Session = Depends(current_session)):
        return [_photo_json(r) for r in store.list_photos()]

    @app.delete("/api/photos/{photo_id}")
    def delete_photo(photo_id: int, session: Session = Depends(current_session)):
        try:
            store.delete_photo(photo_id)
        except NotFoundError:
            raise HTTPException(status_code=404, detail="no such photo")
        return {"ok": True}

    @app.get("/images/{name}")
    def image_bytes(name: str, session: Session = Depends(current_session)):
        if not _IMAGE_NAME.match(name) or ".." in name:
            raise HTTPException(status_code=404, detail="no such image")
        target = (archive_dir / name).resolve()
        if target.parent != archive_dir.resolve() or not target.is_file():
            raise HTTPException(status_code=404, detail="no such image")
        return FileResponse(target, media_type="image/jpeg")

    @app.post("/api/password")
    def change_password(body: PasswordChange, session: Session = Depends(current_session)):
        if body.new != body.confirm:
            return JSONResponse(
                status_code=422, content={"detail": "new password and confirmation differ"}
            )
        account = store.get_account(session.account_id)
        if account is None:
            raise HTTPException(status_code=401, detail="account vanished")
        if not store.change_password(account.username, body.old, body.new):
            raise HTTPException(status_code=403, detail="old password is wrong")
        return {"ok": True}

    @app.get("/api/contacts")
    def list_contacts(session: Session = Depends(current_session)):
        return [{"id": c.id, "contact_no": c.contact_no} for c in store.list_contacts()]

    @app.post("/api/contacts")
    def add_contact(body: NewContact, session: Session = Depends(current_session)):
        try:
            contact_id = store.add_contact(body.contact_no)
        except ValidationError:
            return JSONResponse(status_code=422, content={"detail": "not a phone number"})
        return {"id": contact_id, "contact_no": body.contact_no}

    @app.delete("/api/contacts/{contact_id}")
    def delete_contact(contact_id: int, session: Session = Depends(current_session)):
        try:
            store.delete_contact(contact_id)
        except NotFoundError:
            raise HTTPException(status_code=404, detail="no such contact")
        return {"ok": True}

    if ui_dist is not None and Path(ui_dist).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dist), html=True), name="console")

    return app
