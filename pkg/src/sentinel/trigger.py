"""Capture-burst state machine.

Debounces triggered motion reports into capture events. The machine cycles
through three phases:

* idle - frames rotate through a bounded pre-trigger ring; a triggered
  report starts a capture seeded with the ring contents plus the trigger
  frame itself;
* capturing - fed frames are appended (at most ``frequency_hz`` per second)
  until ``post_count`` post-trigger frames are collected, then the event is
  emitted; triggered reports arriving mid-burst are ignored;
* deactivated - starts when the burst completes and lasts
  ``deactivation_s`` seconds, during which nothing is buffered or triggered.

Buffered intake (ring rotation while idle, appends while capturing) obeys the
capture frequency; the trigger frame itself is always taken immediately.
Ownership is single-feeder: one logical caller drives ``feed`` at a time.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .detector import Frame, MotionReport

_SPACING_SLACK = 1e-9  # float tolerance when comparing against 1/frequency


class ClockError(ValueError):
    """Raised when a fed timestamp moves backwards."""


@dataclass(frozen=True)
class TriggerConfig:
    pre_count: int = 2
    post_count: int = 2
    frequency_hz: float = 1.0
    deactivation_s: float = 10.0

    def __post_init__(self) -> None:
        if self.pre_count < 0:
            raise ValueError("pre_count must be non-negative")
        if self.post_count <= 0:
            raise ValueError("post_count must be positive")
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be positive")
        if self.deactivation_s < 0:
            raise ValueError("deactivation_s must be non-negative")

    @property
    def capture_period_s(self) -> float:
        return 1.0 / self.frequency_hz


class Phase(enum.Enum):
    IDLE = "idle"
    CAPTURING = "capturing"
    DEACTIVATED = "deactivated"


@dataclass(frozen=True)
class CaptureEvent:
    """One completed burst: pre-trigger frames, the trigger frame, then
    post-trigger frames, in capture order."""

    frames: tuple[Frame, ...]
    triggered_at: float
    grade_at_trigger: float

    def __post_init__(self) -> None:
        if not self.frames:
            raise ValueError("a capture event holds at least the trigger frame")


class TriggerMachine:
    """Single-owner debounce machine; emitted events may be consumed anywhere."""

    def __init__(self, config: TriggerConfig):
        self.config = config
        self._ring: deque[Frame] = deque(maxlen=config.pre_count)
        self._phase = Phase.IDLE
        self._pending: list[Frame] = []
        self._post_remaining = 0
        self._triggered_at = 0.0
        self._grade_at_trigger = 0.0
        self._last_intake_at: Optional[float] = None
        self._deactivated_until = 0.0
        self._last_fed_at: Optional[float] = None

    @property
    def phase(self) -> Phase:
        return self._phase

    @property
    def ring_frames(self) -> tuple[Frame, ...]:
        return tuple(self._ring)

    @property
    def deactivated_until(self) -> float:
        return self._deactivated_until

    def reset(self) -> None:
        """Back to idle with an empty ring, dropping any burst in progress."""
        self._ring.clear()
        self._phase = Phase.IDLE
        self._pending = []
        self._post_remaining = 0
        self._last_intake_at = None
        self._deactivated_until = 0.0

    def _intake_due(self, now: float) -> bool:
        if self._last_intake_at is None:
            return True
        return now - self._last_intake_at >= self.config.capture_period_s - _SPACING_SLACK

    def feed(self, frame: Frame, report: MotionReport, now: float) -> Optional[CaptureEvent]:
        """Advance the machine by one frame/report pair.

        Returns the completed CaptureEvent when this frame finishes a burst,
        otherwise None. Timestamps must be non-decreasing across calls.
        """
        if self._last_fed_at is not None and now < self._last_fed_at:
            raise ClockError(f"timestamp moved backwards: {now} < {self._last_fed_at}")
        self._last_fed_at = now

        if self._phase is Phase.DEACTIVATED:
            if now < self._deactivated_until:
                return None
            self._phase = Phase.IDLE
            self._last_intake_at = None

        if self._phase is Phase.IDLE:
            if report.triggered:
                self._phase = Phase.CAPTURING
                self._pending = list(self._ring) + [frame]
                self._ring.clear()
                self._post_remaining = self.config.post_count
                self._triggered_at = now
                self._grade_at_trigger = report.grade
                self._last_intake_at = now
                return None
            if self.config.pre_count > 0 and self._intake_due(now):
                self._ring.append(frame)
                self._last_intake_at = now
            return None

        # capturing: every fed frame is a post-trigger candidate, rate-limited
        if self._intake_due(now):
            self._pending.append(frame)
            self._last_intake_at = now
            self._post_remaining -= 1
            if self._post_remaining == 0:
                event = CaptureEvent(
                    frames=tuple(self._pending),
                    triggered_at=self._triggered_at,
                    grade_at_trigger=self._grade_at_trigger,
                )
                self._pending = []
                self._phase = Phase.DEACTIVATED
                self._deactivated_until = now + self.config.deactivation_s
                self._last_intake_at = None
                return event
        return None
