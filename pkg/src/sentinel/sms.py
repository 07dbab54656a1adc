"""SMS dispatch over a GSM text-mode byte channel.

The send sequence is the classic text-mode exchange: AT handshake, CMGF=1 to
select text mode, CMGS with the recipient, then the body terminated by 0x1A
(Ctrl+Z). Every line sent and reply received lands in a transcript, mirroring
a modem activity log.

The channel abstraction covers a real serial device and the in-process
simulated modem; the simulator records every delivered message in an
inspectable outbox and can inject faults at chosen steps.
"""
from __future__ import annotations

import queue
import re
import socket
import threading
import time
from dataclasses import dataclass, field
from typing import Optional, Union

PHONE_PATTERN = re.compile(r"^\+?\d{3,15}$")
MAX_BODY_CHARS = 160
_CTRL_Z = b"\x1a"

_CMGS_REF = re.compile(r"\+CMGS:\s*(\d+)")
_CMS_ERROR = re.compile(r"\+CMS ERROR:\s*\S+")


class ChannelClosedError(ConnectionError):
    """The byte channel hit EOF while a reply was expected."""


class InvalidMessageError(ValueError):
    """Message fields violate the recipient or body invariants."""


@dataclass(frozen=True)
class SmsMessage:
    recipient: str
    body: str
    created_at: float = 0.0

    def __post_init__(self) -> None:
        if not PHONE_PATTERN.match(self.recipient):
            raise InvalidMessageError(f"not a phone number: {self.recipient!r}")
        if len(self.body) > MAX_BODY_CHARS:
            raise InvalidMessageError(f"body exceeds {MAX_BODY_CHARS} characters")


def body_is_sendable(body: str) -> bool:
    """True when every character is in the plain text-mode set (printable
    ASCII, CR, LF). In particular the 0x1A terminator byte is not sendable."""
    return all(ch in ("\r", "\n") or 32 <= ord(ch) <= 126 for ch in body)


@dataclass(frozen=True)
class Sent:
    reference: int


@dataclass(frozen=True)
class Failed:
    code: str


Outcome = Union[Sent, Failed]


@dataclass
class ModemTranscript:
    """Ordered (sent, received) exchange log plus the final outcome."""

    exchanges: list[tuple[str, str]] = field(default_factory=list)
    outcome: Outcome = Failed("not attempted")

    @property
    def ok(self) -> bool:
        return isinstance(self.outcome, Sent)


class SocketChannel:
    """Byte channel over a connected socket (the simulator side hands these out)."""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    def write(self, data: bytes) -> None:
        self._sock.sendall(data)

    def read(self, timeout_s: float) -> bytes:
        """Up to 4096 bytes; b'' on timeout. Raises ChannelClosedError on EOF."""
        self._sock.settimeout(timeout_s)
        try:
            data = self._sock.recv(4096)
        except (socket.timeout, TimeoutError):
            return b""
        if data == b"":
            raise ChannelClosedError("modem channel closed")
        return data

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class SerialChannel:
    """Byte channel over a serial device path (real modem hardware).

    Only opened when configuration points at a device; the test suite always
    uses the simulator.
    """

    def __init__(self, device: str, baud: int = 115200):  # pragma: no cover - hardware only
        import os

        self._fd = os.open(device, os.O_RDWR | os.O_NOCTTY)
        try:
            import termios
        except ImportError:
            return
        try:
            attrs = termios.tcgetattr(self._fd)
            rate = getattr(termios, f"B{baud}", termios.B115200)
            attrs[4] = attrs[5] = rate
            termios.tcsetattr(self._fd, termios.TCSANOW, attrs)
        except termios.error:
            pass  # not a tty (e.g. a pipe stand-in); use it as-is

    def write(self, data: bytes) -> None:  # pragma: no cover - hardware only
        import os

        os.write(self._fd, data)

    def read(self, timeout_s: float) -> bytes:  # pragma: no cover - hardware only
        import os
        import select

        ready, _, _ = select.select([self._fd], [], [], timeout_s)
        if not ready:
            return b""
        data = os.read(self._fd, 4096)
        if data == b"":
            raise ChannelClosedError("serial device closed")
        return data

    def close(self) -> None:  # pragma: no cover - hardware only
        import os

        os.close(self._fd)


def _read_until(channel, tokens: tuple[str, ...], timeout_s: float) -> Optional[str]:
    """Accumulate channel bytes until any token appears; None on timeout."""
    deadline = time.monotonic() + timeout_s
    buf = b""
    while True:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            return None
        chunk = channel.read(min(remaining, 0.2))
        if chunk:
            buf += chunk
            text = buf.decode("ascii", errors="replace")
            if any(token in text for token in tokens):
                return text


def _failure_code(reply: str) -> str:
    match = _CMS_ERROR.search(reply)
    return match.group(0) if match else "ERROR"


def send(message: SmsMessage, channel, reply_timeout_s: float = 10.0) -> ModemTranscript:
    """Run the full text-mode exchange for one message.

    Returns a transcript whose outcome is Sent(reference) only when the final
    OK followed the +CMGS acknowledgement. A body that cannot be represented
    in text mode fails before any byte is written.
    """
    transcript = ModemTranscript()
    if not body_is_sendable(message.body):
        transcript.outcome = Failed("invalid body")
        return transcript

    def exchange(sent_text: str, payload: bytes, tokens: tuple[str, ...]) -> Optional[str]:
        channel.write(payload)
        reply = _read_until(channel, tokens, reply_timeout_s)
        transcript.exchanges.append((sent_text, reply if reply is not None else ""))
        return reply

    try:
        for command in ("AT", "AT+CMGF=1"):
            reply = exchange(command, command.encode("ascii") + b"\r\n", ("OK", "ERROR"))
            if reply is None:
                transcript.outcome = Failed("timeout")
                return transcript
            if "ERROR" in reply:
                transcript.outcome = Failed(_failure_code(reply))
                return transcript

        submit = f'AT+CMGS="{message.recipient}"'
        reply = exchange(submit, submit.encode("ascii") + b"\r\n", ("> ", "ERROR"))
        if reply is None:
            transcript.outcome = Failed("timeout")
            return transcript
        if "ERROR" in reply:
            transcript.outcome = Failed(_failure_code(reply))
            return transcript

        reply = exchange(message.body, message.body.encode("ascii") + _CTRL_Z, ("OK", "ERROR"))
        if reply is None:
            transcript.outcome = Failed("timeout")
            return transcript
        if "ERROR" in reply:
            transcript.outcome = Failed(_failure_code(reply))
            return transcript
        match = _CMGS_REF.search(reply)
        if match is None:
            transcript.outcome = Failed("missing +CMGS reference")
            return transcript
        transcript.outcome = Sent(int(match.group(1)))
        return transcript
    except ChannelClosedError:
        transcript.outcome = Failed("channel closed")
        return transcript


@dataclass(frozen=True)
class DeliveredSms:
    recipient: str
    body: str
    reference: int


@dataclass(frozen=True)
class FaultPlan:
    """Injected misbehavior, step by step. Each field is None (behave),
    "error", "timeout" (stay silent), or a literal reply such as
    "+CMS ERROR: 500"."""

    at: Optional[str] = None
    cmgf: Optional[str] = None
    cmgs: Optional[str] = None
    body: Optional[str] = None


class SimulatedModem:
    """In-process stand-in for a GSM modem on a serial line.

    Serves the text-mode AT grammar over a socket pair and records every
    completed message in ``outbox``. References count up from 1.
    """

    def __init__(self, fault_plan: Optional[FaultPlan] = None):
        self.fault_plan = fault_plan or FaultPlan()
        self.outbox: list[DeliveredSms] = []
        self._lock = threading.Lock()
        self._next_ref = 1
        modem_side, caller_side = socket.socketpair()
        self._sock = modem_side
        self.channel = SocketChannel(caller_side)
        self._thread = threading.Thread(target=self._serve, name="sim-modem", daemon=True)
        self._thread.start()

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass
        self.channel.close()

    def outbox_snapshot(self) -> list[DeliveredSms]:
        with self._lock:
            return list(self.outbox)

    def _reply(self, text: str) -> None:
        try:
            self._sock.sendall(text.encode("ascii"))
        except OSError:
            pass

    def _apply_fault(self, fault: Optional[str], normal_reply: str) -> bool:
        """Send the reply for this step; False when the exchange must stop
        (fault swallowed the normal flow)."""
        if fault is None:
            self._reply(normal_reply)
            return True
        if fault == "timeout":
            return False
        if fault == "error":
            self._reply("\r\nERROR\r\n")
            return False
        self._reply(f"\r\n{fault}\r\n")
        return False

    def _serve(self) -> None:
        buf = b""
        pending_body: Optional[bytes] = None
        pending_recipient = ""
        while True:
            try:
                data = self._sock.recv(4096)
            except OSError:
                return
            if data == b"":
                return
            buf += data
            while True:
                if pending_body is not None:
                    idx = buf.find(_CTRL_Z)
                    if idx < 0:
                        break
                    body = (pending_body + buf[:idx]).decode("ascii", errors="replace")
                    buf = buf[idx + 1:]
                    pending_body = None
                    if self.fault_plan.body is not None:
                        self._apply_fault(self.fault_plan.body, "")
                        continue
                    with self._lock:
                        ref = self._next_ref
                        self._next_ref += 1
                        self.outbox.append(
                            DeliveredSms(recipient=pending_recipient, body=body, reference=ref)
                        )
                    self._reply(f"\r\n+CMGS: {ref}\r\n\r\nOK\r\n")
                    continue
                eol = buf.find(b"\r")
                if eol < 0:
                    eol = buf.find(b"\n")
                if eol < 0:
                    break
                line = buf[:eol].decode("ascii", errors="replace").strip()
                buf = buf[eol + 1:]
                if buf.startswith(b"\n"):  # swallow the LF of a CRLF pair
                    buf = buf[1:]
                if not line:
                    continue
                if line == "AT":
                    self._apply_fault(self.fault_plan.at, "\r\nOK\r\n")
                elif line == "AT+CMGF=1":
                    self._apply_fault(self.fault_plan.cmgf, "\r\nOK\r\n")
                elif line.startswith("AT+CMGS="):
                    if self.fault_plan.cmgs is not None:
                        self._apply_fault(self.fault_plan.cmgs, "")
                        continue
                    pending_recipient = line.split("=", 1)[1].strip().strip('"')
                    pending_body = b""
                    self._reply("\r\n> ")
                else:
                    self._reply("\r\nERROR\r\n")


class SmsDispatcher:
    """Owns the modem channel; producers enqueue, one worker sends in order.

    Every submitted message ends up either in ``sent`` (with its transcript)
    or in ``dead_letters`` (message + transcript); nothing is lost or retried.
    """

    def __init__(self, channel, reply_timeout_s: float = 10.0):
        self._channel = channel
        self._timeout = reply_timeout_s
        self._queue: "queue.Queue[Optional[SmsMessage]]" = queue.Queue()
        self._lock = threading.Lock()
        self.sent: list[tuple[SmsMessage, ModemTranscript]] = []
        self.dead_letters: list[tuple[SmsMessage, ModemTranscript]] = []
        self._thread = threading.Thread(target=self._run, name="sms-dispatch", daemon=True)
        self._started = False

    def start(self) -> None:
        if not self._started:
            self._started = True
            self._thread.start()

    def stop(self) -> None:
        if self._started:
            self._queue.put(None)
            self._thread.join(timeout=5.0)

    def submit(self, message: SmsMessage) -> None:
        self._queue.put(message)

    def wait_idle(self, timeout_s: float = 10.0) -> bool:
        """Block until every submitted message has been dispatched."""
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            if self._queue.unfinished_tasks == 0:
                return True
            time.sleep(0.01)
        return False

    def _run(self) -> None:
        while True:
            message = self._queue.get()
            if message is None:
                self._queue.task_done()
                return
            try:
                transcript = send(message, self._channel, self._timeout)
                with self._lock:
                    if transcript.ok:
                        self.sent.append((message, transcript))
                    else:
                        self.dead_letters.append((message, transcript))
            finally:
                self._queue.task_done()
