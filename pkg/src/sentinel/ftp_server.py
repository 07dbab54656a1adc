"""Minimal FTP server that accepts camera image uploads.

Speaks just enough RFC 959 for a camera (or a stock client) to push files:
USER/PASS login, TYPE I/A, passive-mode data connections, STOR, NOOP, QUIT.
Anything else gets 502, out-of-sequence commands get 503, and active mode
(PORT) is deliberately not offered.

Uploads are written to a temporary name and renamed into place only when the
transfer completes, so a partial file is never visible under its final name.
Each completed STOR publishes exactly one UploadEvent; aborted transfers
publish nothing.
"""
from __future__ import annotations

import enum
import logging
import os
import socket
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

log = logging.getLogger(__name__)

_MAX_LINE = 4096
_DATA_ACCEPT_TIMEOUT_S = 10.0
_CONTROL_IDLE_TIMEOUT_S = 120.0


@dataclass(frozen=True)
class FtpConfig:
    source_dir: Path
    host: str = "127.0.0.1"
    port: int = 2121
    pasv_ports: tuple[int, int] = (50000, 50100)  # inclusive
    username: str = "camera"
    password: str = "camera"


@dataclass(frozen=True)
class UploadEvent:
    stored_path: Path
    byte_count: int
    received_at: float
    remote_name: str


class SessionState(enum.Enum):
    AWAIT_USER = "await_user"
    AWAIT_PASS = "await_pass"
    READY = "ready"


class DataAbort(Exception):
    """Data connection failed mid-transfer."""


class DataChannel:
    """One passive-mode data endpoint: a listening socket the client dials."""

    def __init__(self, host: str, pasv_ports: tuple[int, int]):
        self.host = host
        self._listener: Optional[socket.socket] = None
        low, high = pasv_ports
        for port in range(low, high + 1):
            sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            try:
                sock.bind((host, port))
            except OSError:
                sock.close()
                continue
            sock.listen(1)
            sock.settimeout(_DATA_ACCEPT_TIMEOUT_S)
            self._listener = sock
            break

    @property
    def ready(self) -> bool:
        return self._listener is not None

    @property
    def port(self) -> int:
        assert self._listener is not None
        return self._listener.getsockname()[1]

    def receive_into(self, target) -> int:
        """Accept the client's connection and stream everything it sends into
        the open file ``target``; returns the byte count. Raises DataAbort on
        timeout or a broken connection."""
        assert self._listener is not None
        try:
            conn, _ = self._listener.accept()
        except (socket.timeout, OSError) as exc:
            raise DataAbort(f"no data connection: {exc}") from exc
        total = 0
        conn.settimeout(_DATA_ACCEPT_TIMEOUT_S)
        try:
            while True:
                chunk = conn.recv(65536)
                if chunk == b"":
                    return total
                target.write(chunk)
                total += len(chunk)
        except OSError as exc:
            raise DataAbort(f"data connection lost: {exc}") from exc
        finally:
            try:
                conn.close()
            except OSError:
                pass

    def close(self) -> None:
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass
            self._listener = None


def safe_upload_name(source_dir: Path, remote_name: str) -> Optional[Path]:
    """Resolve a client-supplied name inside the source directory, or None
    when the name is empty, contains path separators, or escapes the root."""
    if not remote_name or len(remote_name) > 255:
        return None
    if "/" in remote_name or "\\" in remote_name or remote_name in (".", ".."):
        return None
    candidate = (source_dir / remote_name).resolve()
    if candidate.parent != source_dir.resolve():
        return None
    return candidate


class FtpSession:
    """Control-channel state machine for one client connection.

    Data-channel mechanics are injected through ``channel_factory`` so the
    command grammar is testable without sockets.
    """

    def __init__(
        self,
        config: FtpConfig,
        publish: Callable[[UploadEvent], None],
        channel_factory: Callable[[], DataChannel],
    ):
        self.config = config
        self.publish = publish
        self.channel_factory = channel_factory
        self.state = SessionState.AWAIT_USER
        self.authenticated_as: Optional[str] = None
        self._claimed_user = ""
        self.data_channel: Optional[DataChannel] = None
        self.closed = False

    def close_data_channel(self) -> None:
        if self.data_channel is not None:
            self.data_channel.close()
            self.data_channel = None

    def handle_line(self, line: str):
        """Process one command line, yielding each reply as it is ready.

        Callers must drain the iterator: STOR yields its preliminary 150
        before the (blocking) transfer and the completion code after, every
        other command yields exactly one reply.
        """
        line = line.strip("\r\n")
        if not line or len(line) > _MAX_LINE:
            yield "500 Syntax error."
            return
        verb, _, argument = line.partition(" ")
        verb = verb.upper()
        argument = argument.strip()
        if verb in ("PORT", "EPRT"):
            yield "502 Active mode not supported; use PASV."
            return
        if not verb.isascii() or not verb.isalpha() or len(verb) > 8:
            yield "500 Syntax error."
            return
        handler = getattr(self, f"_cmd_{verb.lower()}", None)
        if handler is None:
            yield f"502 Command not implemented: {verb}."
            return
        yield from handler(argument)

    # -- command handlers (one per verb) -----------------------------------

    def _cmd_user(self, argument: str) -> list[str]:
        if self.state is SessionState.READY:
            return ["503 Already logged in."]
        if not argument:
            return ["500 Syntax error: USER needs a name."]
        self._claimed_user = argument
        self.state = SessionState.AWAIT_PASS
        return ["331 Password required."]

    def _cmd_pass(self, argument: str) -> list[str]:
        if self.state is not SessionState.AWAIT_PASS:
            return ["503 Login with USER first."]
        if self._claimed_user == self.config.username and argument == self.config.password:
            self.state = SessionState.READY
            self.authenticated_as = self._claimed_user
            return ["230 Logged in."]
        self.state = SessionState.AWAIT_USER
        self._claimed_user = ""
        return ["530 Login incorrect."]

    def _cmd_type(self, argument: str) -> list[str]:
        if self.state is not SessionState.READY:
            return ["530 Not logged in."]
        mode = argument.upper()
        if mode in ("I", "A"):
            return [f"200 Type set to {mode}."]
        return ["504 Only types I and A are supported."]

    def _cmd_pasv(self, argument: str) -> list[str]:
        if self.state is not SessionState.READY:
            return ["530 Not logged in."]
        self.close_data_channel()
        channel = self.channel_factory()
        if not channel.ready:
            return ["425 Cannot open passive port."]
        self.data_channel = channel
        octets = channel.host.split(".")
        port = channel.port
        digits = ",".join(octets + [str(port >> 8), str(port & 0xFF)])
        return [f"227 Entering passive mode ({digits})."]

    def _cmd_stor(self, argument: str):
        if self.state is not SessionState.READY:
            yield "530 Not logged in."
            return
        if self.data_channel is None or not self.data_channel.ready:
            yield "425 Use PASV first."
            return
        target = safe_upload_name(self.config.source_dir, argument)
        if target is None:
            self.close_data_channel()
            yield "553 File name not allowed."
            return
        yield "150 Ready to receive."
        yield self._receive_file(target, argument)

    def _receive_file(self, target: Path, remote_name: str) -> str:
        channel = self.data_channel
        assert channel is not None
        tmp_fd, tmp_path = tempfile.mkstemp(prefix=".part-", dir=self.config.source_dir)
        try:
            with os.fdopen(tmp_fd, "wb") as tmp:
                byte_count = channel.receive_into(tmp)
            os.replace(tmp_path, target)
        except DataAbort as exc:
            try:
                os.unlink(tmp_path)
            except OSError:
                pass
            return f"426 Transfer aborted: {exc}."
        finally:
            self.close_data_channel()
        self.publish(
            UploadEvent(
                stored_path=target,
                byte_count=byte_count,
                received_at=time.time(),
                remote_name=remote_name,
            )
        )
        return "226 Transfer complete."

    def _cmd_noop(self, argument: str) -> list[str]:
        return ["200 Okay."]

    def _cmd_quit(self, argument: str) -> list[str]:
        self.closed = True
        self.close_data_channel()
        return ["221 Goodbye."]


class FtpServer:
    """Threaded server: one control thread per camera session.

    Sessions are independent; the only shared endpoint is ``publish``, which
    must tolerate concurrent calls (a queue's put does).
    """

    def __init__(self, config: FtpConfig, publish: Callable[[UploadEvent], None]):
        self.config = config
        self.publish = publish
        self._listener: Optional[socket.socket] = None
        self._accept_thread: Optional[threading.Thread] = None
        self._running = False
        self.port = config.port
        Path(config.source_dir).mkdir(parents=True, exist_ok=True)

    def start(self) -> None:
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((self.config.host, self.config.port))
        listener.listen(8)
        listener.settimeout(0.5)
        self._listener = listener
        self.port = listener.getsockname()[1]
        self._running = True
        self._accept_thread = threading.Thread(target=self._accept_loop, name="ftp-accept", daemon=True)
        self._accept_thread.start()

    def stop(self) -> None:
        self._running = False
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5.0)

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while self._running:
            try:
                conn, addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            thread = threading.Thread(
                target=self._serve_control, args=(conn, addr), name="ftp-session", daemon=True
            )
            thread.start()

    def _make_channel(self, control: socket.socket) -> DataChannel:
        host = control.getsockname()[0]
        return DataChannel(host, self.config.pasv_ports)

    def _serve_control(self, conn: socket.socket, addr) -> None:
        session = FtpSession(
            self.config, self.publish, channel_factory=lambda: self._make_channel(conn)
        )
        conn.settimeout(_CONTROL_IDLE_TIMEOUT_S)

        def reply(text: str) -> None:
            conn.sendall(text.encode("latin-1", errors="replace") + b"\r\n")

        try:
            reply("220 Sentinel FTP ready.")
            buf = b""
            while not session.closed:
                while b"\n" not in buf:
                    if len(buf) > _MAX_LINE:
                        # pathological unterminated line: answer once, drop the rest
                        reply("500 Line too long.")
                        buf = b""
                    try:
                        chunk = conn.recv(4096)
                    except socket.timeout:
                        return
                    if chunk == b"":
                        return
                    buf += chunk
                raw, _, buf = buf.partition(b"\n")
                line = raw.decode("latin-1", errors="replace")
                for text in session.handle_line(line):
                    reply(text)
        except OSError:
            pass
        except Exception:  # never let one session take the server down
            log.exception("ftp session crashed (%s)", addr)
        finally:
            session.close_data_channel()
            try:
                conn.close()
            except OSError:
                pass
