"""Assembles the full notification service on one machine.

Wiring: FTP ingest publishes upload events into the pipeline queue; the
pipeline archives images, records them, and fans alert messages out to the
SMS dispatcher; the dispatcher drives the modem channel (a real serial
device, or the in-process simulator when ``sms.device = sim``); the web API
exposes the store and archive to the console.
"""
from __future__ import annotations

import threading
import time
from pathlib import Path
from typing import Optional

import uvicorn

from .config import AppConfig
from .ftp_server import FtpConfig, FtpServer, UploadEvent
from .pipeline import AlertJob, JobOrigin, Pipeline
from .sms import SerialChannel, SimulatedModem, SmsDispatcher
from .store import Store
from .web_api import create_app


class Daemon:
    """Owns every long-lived component; start() brings the system up in
    dependency order and stop() tears it down in reverse."""

    def __init__(self, config: AppConfig):
        self.config = config
        config.data_dir.mkdir(parents=True, exist_ok=True)
        config.source_dir.mkdir(parents=True, exist_ok=True)

        self.store = Store(config.db_path, media_root=config.archive_root)
        self.store.bootstrap_account(config.admin_username, config.admin_password)

        self.modem: Optional[SimulatedModem] = None
        if config.sms_device == "sim":
            self.modem = SimulatedModem()
            channel = self.modem.channel
        else:
            channel = SerialChannel(config.sms_device, baud=config.sms_baud)
        self.dispatcher = SmsDispatcher(channel, reply_timeout_s=config.sms_reply_timeout_s)

        self.pipeline = Pipeline(
            store=self.store,
            send_sms=self.dispatcher.submit,
            data_root=config.archive_root,
            archive_dir=config.pipeline_archive_dir,
            timezone=config.pipeline_timezone,
            retries=config.pipeline_retries,
        )

        self.ftp = FtpServer(
            FtpConfig(
                source_dir=config.source_dir,
                host=config.ftp_host,
                port=config.ftp_port,
                pasv_ports=(config.ftp_pasv_low, config.ftp_pasv_high),
                username=config.ftp_username,
                password=config.ftp_password,
            ),
            publish=self._on_upload,
        )

        ui_dist = Path(config.ui_dist) if config.ui_dist else Path("frontend/dist")
        self.app = create_app(
            self.store,
            archive_dir=config.archive_root / config.pipeline_archive_dir,
            ui_dist=ui_dist if ui_dist.is_dir() else None,
        )
        self._http_server: Optional[uvicorn.Server] = None
        self._http_thread: Optional[threading.Thread] = None

    def _on_upload(self, event: UploadEvent) -> None:
        self.pipeline.submit(
            AlertJob(
                source_path=event.stored_path,
                event_time=event.received_at,
                origin=JobOrigin.FTP_UPLOAD,
            )
        )

    # -- lifecycle ----------------------------------------------------------

    def start(self, serve_http: bool = True) -> None:
        self.dispatcher.start()
        self.pipeline.start()
        self.ftp.start()
        if serve_http:
            uv_config = uvicorn.Config(
                self.app,
                host=self.config.http_host,
                port=self.config.http_port,
                log_level="warning",
            )
            self._http_server = uvicorn.Server(uv_config)
            self._http_thread = threading.Thread(
                target=self._http_server.run, name="http", daemon=True
            )
            self._http_thread.start()
            deadline = time.monotonic() + 10.0
            while not self._http_server.started and time.monotonic() < deadline:
                time.sleep(0.02)

    @property
    def http_port(self) -> int:
        """Actual bound port (useful when configured with port 0)."""
        if self._http_server is not None and self._http_server.servers:
            return self._http_server.servers[0].sockets[0].getsockname()[1]
        return self.config.http_port

    def stop(self) -> None:
        if self._http_server is not None:
            self._http_server.should_exit = True
            if self._http_thread is not None:
                self._http_thread.join(timeout=10.0)
        self.ftp.stop()
        self.pipeline.stop()
        self.dispatcher.stop()
        if self.modem is not None:
            self.modem.close()
        self.store.close()

    def run_forever(self) -> None:
        self.start()
        try:
            while True:
                time.sleep(1.0)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()
