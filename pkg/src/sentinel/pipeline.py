"""Alert pipeline: archive the image, record it, fan out one SMS per contact.

Jobs arrive from the FTP ingest (or directly from a simulated capture) and
are processed strictly in order by a single worker, which keeps photo ids
monotonic and the modem serialized. Each job either completes fully -
archived copy, photo record, one queued message per stored contact - or
produces nothing.
"""
from __future__ import annotations

import enum
import logging
import os
import queue
import shutil
import threading
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional
from zoneinfo import ZoneInfo

from .sms import SmsMessage
from .store import PhotoRecord, Store, StoreError

log = logging.getLogger(__name__)

ALERT_BODY_TEMPLATE = "Motion detected at {time} on {date}."
DEFAULT_TIMEZONE = "Asia/Kuala_Lumpur"


class JobOrigin(enum.Enum):
    FTP_UPLOAD = "ftp_upload"
    SIMULATED_CAPTURE = "simulated_capture"


@dataclass(frozen=True)
class AlertJob:
    source_path: Path
    event_time: float  # epoch seconds
    origin: JobOrigin = JobOrigin.FTP_UPLOAD


@dataclass(frozen=True)
class ArchiveName:
    """Timestamped archive file name, `image/YYYY-MM-DD_HH-MM-SS.jpg`."""

    date_part: str
    time_part: str
    suffix: int = 0  # 0 = no collision suffix, else appended as "-2", "-3", ...
    dir_name: str = "image"

    @classmethod
    def from_instant(cls, event_time: float, tz: ZoneInfo, dir_name: str = "image") -> "ArchiveName":
        stamp = datetime.fromtimestamp(event_time, tz)
        return cls(
            date_part=stamp.strftime("%Y-%m-%d"),
            time_part=stamp.strftime("%H-%M-%S"),
            dir_name=dir_name,
        )

    @property
    def file_name(self) -> str:
        tail = f"-{self.suffix}" if self.suffix else ""
        return f"{self.date_part}_{self.time_part}{tail}.jpg"

    @property
    def full(self) -> str:
        return f"{self.dir_name}/{self.file_name}"

    @property
    def record_time(self) -> str:
        return self.time_part.replace("-", ":")


def render_alert_body(record: PhotoRecord) -> str:
    """The alert text carried by every SMS: the record's time and date."""
    return ALERT_BODY_TEMPLATE.format(time=record.photo_time, date=record.photo_date)


class CopyFailure(Exception):
    """Source image could not be read or copied; the job is abandoned."""


class Pipeline:
    """Serial alert-job processor.

    ``submit`` is safe from any thread; the worker loop applies each job via
    ``process``. Store failures are retried up to ``retries`` times and then
    dead-lettered; copy failures are not retried (the source is gone).
    """

    def __init__(
        self,
        store: Store,
        send_sms: Callable[[SmsMessage], None],
        data_root: str | Path,
        archive_dir: str = "image",
        timezone: str = DEFAULT_TIMEZONE,
        retries: int = 3,
        retry_delay_s: float = 0.05,
    ):
        self.store = store
        self.send_sms = send_sms
        self.data_root = Path(data_root)
        self.archive_dir = archive_dir
        self.tz = ZoneInfo(timezone)
        self.retries = retries
        self.retry_delay_s = retry_delay_s
        self.dead_letters: list[tuple[AlertJob, str]] = []
        self._queue: "queue.Queue[Optional[AlertJob]]" = queue.Queue()
        self._thread = threading.Thread(target=self._run, name="pipeline", daemon=True)
        self._started = False
        (self.data_root / self.archive_dir).mkdir(parents=True, exist_ok=True)

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> None:
        if not self._started:
            self._started = True
            self._thread.start()

    def stop(self) -> None:
        if self._started:
            self._queue.put(None)
            self._thread.join(timeout=5.0)

    def submit(self, job: AlertJob) -> None:
        self._queue.put(job)

    def wait_idle(self, timeout_s: float = 10.0) -> bool:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            if self._queue.unfinished_tasks == 0:
                return True
            time.sleep(0.01)
        return False

    def _run(self) -> None:
        while True:
            job = self._queue.get()
            if job is None:
                self._queue.task_done()
                return
            try:
                self._process_with_retries(job)
            finally:
                self._queue.task_done()

    def _process_with_retries(self, job: AlertJob) -> None:
        attempts = 1 + max(0, self.retries)
        for attempt in range(attempts):
            try:
                self.process(job)
                return
            except CopyFailure as exc:
                log.error("failed to copy %s: %s", job.source_path, exc)
                return
            except StoreError as exc:
                log.warning("store failure on %s (attempt %d): %s", job.source_path, attempt + 1, exc)
                if attempt + 1 < attempts and self.retry_delay_s:
                    time.sleep(self.retry_delay_s)
                last_error = str(exc)
        self.dead_letters.append((job, last_error))

    # -- the alert process ---------------------------------------------------

    def _claim_archive_name(self, event_time: float) -> ArchiveName:
        """First free timestamped name; same-second collisions get -2, -3, ..."""
        name = ArchiveName.from_instant(event_time, self.tz, dir_name=self.archive_dir)
        candidate = name
        counter = 2
        while (self.data_root / candidate.full).exists():
            candidate = ArchiveName(
                name.date_part, name.time_part, suffix=counter, dir_name=self.archive_dir
            )
            counter += 1
        return candidate

    def process(self, job: AlertJob) -> tuple[PhotoRecord, list[SmsMessage]]:
        """Archive, insert, fan out. Raises CopyFailure or StoreError; on
        StoreError the archived copy is removed so a retry starts clean."""
        name = self._claim_archive_name(job.event_time)
        target = self.data_root / name.full
        try:
            shutil.copyfile(job.source_path, target)
        except OSError as exc:
            raise CopyFailure(str(exc)) from exc

        try:
            photo_id = self.store.insert_photo(
                photo_name=name.full,
                photo_time=name.record_time,
                photo_date=name.date_part,
            )
        except StoreError:
            try:
                os.unlink(target)
            except OSError:
                pass
            raise

        record = PhotoRecord(
            id=photo_id,
            photo_name=name.full,
            photo_time=name.record_time,
            photo_date=name.date_part,
        )
        body = render_alert_body(record)
        messages = [
            SmsMessage(recipient=contact.contact_no, body=body, created_at=time.time())
            for contact in self.store.list_contacts()
        ]
        for message in messages:
            self.send_sms(message)
        return record, messages
