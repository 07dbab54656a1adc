"""Persistence for accounts, notification contacts, and photo records.

Single-file SQLite database with three tables (user_acc, user_contact,
user_photo). Every mutation commits atomically before returning, so an
interrupted process reopens to either the pre- or post-mutation state.
Passwords are stored as salted PBKDF2 hashes, never in clear.

One connection is shared behind a lock: concurrent readers and writers are
serialized, which keeps every operation linearizable.
"""
from __future__ import annotations

import hashlib
import hmac
import os
import re
import sqlite3
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Optional

from .sms import PHONE_PATTERN

PBKDF2_ITERATIONS = 100_000
_SALT_BYTES = 16

_TIME_PATTERN = re.compile(r"^\d{2}:\d{2}:\d{2}$")
_DATE_PATTERN = re.compile(r"^\d{4}-\d{2}-\d{2}$")

_SCHEMA = """
CREATE TABLE IF NOT EXISTS user_acc (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    username TEXT NOT NULL UNIQUE,
    password_hash BLOB NOT NULL,
    salt BLOB NOT NULL
);
CREATE TABLE IF NOT EXISTS user_contact (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    contact_no TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS user_photo (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    photo_name TEXT NOT NULL UNIQUE,
    photo_time TEXT NOT NULL,
    photo_date TEXT NOT NULL
);
"""


class StoreError(Exception):
    """Base class for persistence failures."""


class DuplicateError(StoreError):
    """Unique constraint violated (photo name or username)."""


class NotFoundError(StoreError):
    """Referenced row does not exist."""


class ValidationError(StoreError):
    """Field fails its invariant before touching the database."""


@dataclass(frozen=True)
class UserAccount:
    id: int
    username: str


@dataclass(frozen=True)
class Contact:
    id: int
    contact_no: str


@dataclass(frozen=True)
class PhotoRecord:
    id: int
    photo_name: str
    photo_time: str  # HH:MM:SS
    photo_date: str  # YYYY-MM-DD


def hash_password(password: str, salt: bytes) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, PBKDF2_ITERATIONS)


def _validate_photo_fields(photo_name: str, photo_time: str, photo_date: str) -> None:
    if not photo_name:
        raise ValidationError("photo_name must be non-empty")
    if not _TIME_PATTERN.match(photo_time) or not _DATE_PATTERN.match(photo_date):
        raise ValidationError(f"malformed instant: {photo_date!r} {photo_time!r}")
    try:
        datetime.strptime(f"{photo_date} {photo_time}", "%Y-%m-%d %H:%M:%S")
    except ValueError as exc:
        raise ValidationError(f"not a valid instant: {photo_date} {photo_time}") from exc


class Store:
    """Embedded transactional store.

    ``media_root`` anchors relative photo paths (photo_name is stored as a
    path like ``image/2010-04-12_21-57-21.jpg``); deleting a photo record
    also removes its archived file under that root.
    """

    def __init__(self, path: str | Path, media_root: str | Path | None = None):
        self.path = Path(path)
        self.media_root = Path(media_root) if media_root is not None else self.path.parent
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(str(self.path), check_same_thread=False)
        self._conn.execute("PRAGMA foreign_keys = ON")
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- accounts ---------------------------------------------------------

    def bootstrap_account(self, username: str, password: str) -> Optional[UserAccount]:
        """Seed the single admin account on first run; no-op if any exists."""
        with self._lock:
            row = self._conn.execute("SELECT COUNT(*) FROM user_acc").fetchone()
            if row[0] > 0:
                return None
            return self.create_account(username, password)

    def create_account(self, username: str, password: str) -> UserAccount:
        if not username:
            raise ValidationError("username must be non-empty")
        salt = os.urandom(_SALT_BYTES)
        digest = hash_password(password, salt)
        with self._lock:
            try:
                with self._conn:
                    cur = self._conn.execute(
                        "INSERT INTO user_acc (username, password_hash, salt) VALUES (?, ?, ?)",
                        (username, digest, salt),
                    )
            except sqlite3.IntegrityError as exc:
                raise DuplicateError(f"username already exists: {username}") from exc
            return UserAccount(id=cur.lastrowid, username=username)

    def verify_login(self, username: str, password: str) -> Optional[UserAccount]:
        """Constant-time hash comparison; None on unknown user or bad password."""
        with self._lock:
            row = self._conn.execute(
                "SELECT id, password_hash, salt FROM user_acc WHERE username = ?",
                (username,),
            ).fetchone()
        if row is None:
            return None
        account_id, stored, salt = row
        if not hmac.compare_digest(hash_password(password, salt), stored):
            return None
        return UserAccount(id=account_id, username=username)

    def change_password(self, username: str, old: str, new: str) -> bool:
        """Rotate the hash if the old password verifies; False otherwise."""
        with self._lock:
            if self.verify_login(username, old) is None:
                return False
            salt = os.urandom(_SALT_BYTES)
            with self._conn:
                self._conn.execute(
                    "UPDATE user_acc SET password_hash = ?, salt = ? WHERE username = ?",
                    (hash_password(new, salt), salt, username),
                )
            return True

    def get_account(self, account_id: int) -> Optional[UserAccount]:
        with self._lock:
            row = self._conn.execute(
                "SELECT id, username FROM user_acc WHERE id = ?", (account_id,)
            ).fetchone()
        return UserAccount(*row) if row else None

    # -- photos -----------------------------------------------------------

    def insert_photo(self, photo_name: str, photo_time: str, photo_date: str) -> int:
        _validate_photo_fields(photo_name, photo_time, photo_date)
        with self._lock:
            try:
                with self._conn:
                    cur = self._conn.execute(
                        "INSERT INTO user_photo (photo_name, photo_time, photo_date)"
                        " VALUES (?, ?, ?)",
                        (photo_name, photo_time, photo_date),
                    )
            except sqlite3.IntegrityError as exc:
                raise DuplicateError(f"photo already recorded: {photo_name}") from exc
            return cur.lastrowid

    def list_photos(self) -> list[PhotoRecord]:
        """Newest first by (date, time), insertion order as the tiebreak."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT id, photo_name, photo_time, photo_date FROM user_photo"
                " ORDER BY photo_date DESC, photo_time DESC, id DESC"
            ).fetchall()
        return [PhotoRecord(*row) for row in rows]

    def latest_photo(self) -> Optional[PhotoRecord]:
        photos = self.list_photos()
        return photos[0] if photos else None

    def get_photo(self, photo_id: int) -> Optional[PhotoRecord]:
        with self._lock:
            row = self._conn.execute(
                "SELECT id, photo_name, photo_time, photo_date FROM user_photo WHERE id = ?",
                (photo_id,),
            ).fetchone()
        return PhotoRecord(*row) if row else None

    def delete_photo(self, photo_id: int) -> None:
        """Remove the record and, if present, the archived image file."""
        with self._lock:
            record = self.get_photo(photo_id)
            if record is None:
                raise NotFoundError(f"no photo with id {photo_id}")
            with self._conn:
                self._conn.execute("DELETE FROM user_photo WHERE id = ?", (photo_id,))
            target = self.media_root / record.photo_name
            try:
                target.unlink()
            except FileNotFoundError:
                pass

    # -- contacts ---------------------------------------------------------

    def add_contact(self, contact_no: str) -> int:
        if not PHONE_PATTERN.match(contact_no):
            raise ValidationError(f"not a phone number: {contact_no!r}")
        with self._lock:
            with self._conn:
                cur = self._conn.execute(
                    "INSERT INTO user_contact (contact_no) VALUES (?)", (contact_no,)
                )
            return cur.lastrowid

    def delete_contact(self, contact_id: int) -> None:
        with self._lock:
            with self._conn:
                cur = self._conn.execute(
                    "DELETE FROM user_contact WHERE id = ?", (contact_id,)
                )
            if cur.rowcount == 0:
                raise NotFoundError(f"no contact with id {contact_id}")

    def list_contacts(self) -> list[Contact]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT id, contact_no FROM user_contact ORDER BY id"
            ).fetchall()
        return [Contact(*row) for row in rows]
