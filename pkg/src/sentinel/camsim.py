"""Synthetic camera: renders a moving subject over a static background and
drives the full detect/trigger/upload loop against an FTP endpoint.

The subject is a pair of rectangles travelling together: a bright block that
any sensitivity can see and a dim block visible only to moderate/high
sensitivity. Speeds follow the walk < walk_fast < run ordering. Scripted
events cover the classic false-positive sources: a scene-wide light step and
a dimmed, scaled-down "reflection" of the subject.

Frame generation is deterministic for a given seed (randomness only enters
through optional pixel noise).
"""
from __future__ import annotations

import io
import time
from dataclasses import dataclass
from ftplib import FTP, all_errors as ftp_errors
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .config import parse_kv_file
from .detector import Classification, DetectorConfig, Frame, MotionReport, detect
from .trigger import CaptureEvent, TriggerConfig, TriggerMachine

SPEED_PX_PER_FRAME = {"walk": 2.0, "walk_fast": 5.0, "run": 10.0}


@dataclass(frozen=True)
class MovingBlock:
    """One rectangle of the subject: size plus luminance offset over background."""

    width: int
    height: int
    contrast: int


STANDARD_BLOCKS = (MovingBlock(30, 80, 60), MovingBlock(30, 80, 30))


@dataclass(frozen=True)
class Scenario:
    name: str = "custom"
    width: int = 320
    height: int = 240
    fps: float = 10.0
    duration_s: float = 6.0
    background: int = 40
    speed_px: float = 2.0  # per frame, horizontal
    blocks: tuple[MovingBlock, ...] = STANDARD_BLOCKS
    gap_px: int = 16  # between blocks; keep above the fastest speed
    scale: float = 1.0  # reflections render smaller and dimmer (size and contrast)
    light_step_at_s: Optional[float] = None
    light_step_delta: int = 64
    noise_amp: int = 0

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0 or self.fps <= 0 or self.duration_s <= 0:
            raise ValueError("scenario geometry and timing must be positive")
        if not 0.0 < self.scale <= 1.0:
            raise ValueError("scale must lie in (0, 1]")

    @property
    def frame_count(self) -> int:
        return int(round(self.duration_s * self.fps)) + 1

    def scaled_blocks(self) -> tuple[MovingBlock, ...]:
        if self.scale == 1.0:
            return self.blocks
        return tuple(
            MovingBlock(
                width=max(1, round(b.width * self.scale)),
                height=max(1, round(b.height * self.scale)),
                contrast=round(b.contrast * self.scale),
            )
            for b in self.blocks
        )


@dataclass(frozen=True)
class ScenarioReport:
    scenario: str
    triggers: int
    images_transferred: int
    images_per_second: float
    complete: bool

    def csv_header(self) -> str:
        return "scenario,triggers,images_transferred,images_per_second,complete"

    def csv_row(self) -> str:
        return (
            f"{self.scenario},{self.triggers},{self.images_transferred},"
            f"{self.images_per_second:.3f},{self.complete}"
        )


def _fold(value: float, lo: float, hi: float) -> float:
    """Reflect a coordinate into [lo, hi] (triangle wave), bouncing at walls."""
    span = hi - lo
    if span <= 0:
        return lo
    offset = (value - lo) % (2 * span)
    return lo + (offset if offset <= span else 2 * span - offset)


def generate(scenario: Scenario, seed: int = 0, base_time: float = 0.0) -> list[Frame]:
    """Render the scenario's frame sequence.

    Consecutive frames differ only by the subject displacement plus any
    scripted light step (and seeded noise when enabled).
    """
    rng = np.random.default_rng(seed)
    blocks = scenario.scaled_blocks()
    gap = max(1, round(scenario.gap_px * scenario.scale))
    span = sum(b.width for b in blocks) + gap * (len(blocks) - 1) if blocks else 0
    margin = 4
    lo = float(margin)
    hi = float(max(margin, scenario.width - span - margin))

    frames: list[Frame] = []
    for i in range(scenario.frame_count):
        t = i / scenario.fps
        canvas = np.full((scenario.height, scenario.width), scenario.background, dtype=np.int32)
        x = int(round(_fold(lo + scenario.speed_px * i, lo, hi)))
        for block in blocks:
            y = max(0, (scenario.height - block.height) // 2)
            x_end = min(scenario.width, x + block.width)
            y_end = min(scenario.height, y + block.height)
            if x < x_end and y < y_end:
                canvas[y:y_end, x:x_end] = scenario.background + block.contrast
            x = x_end + gap
        if scenario.light_step_at_s is not None and t >= scenario.light_step_at_s:
            canvas += scenario.light_step_delta
        if scenario.noise_amp > 0:
            canvas += rng.integers(
                -scenario.noise_amp, scenario.noise_amp + 1, size=canvas.shape, dtype=np.int32
            )
        np.clip(canvas, 0, 255, out=canvas)
        frames.append(
            Frame(
                width=scenario.width,
                height=scenario.height,
                pixels=canvas.reshape(-1),
                captured_at=base_time + t,
            )
        )
    return frames


def encode_jpeg(frame: Frame, quality: int = 85) -> bytes:
    image = Image.fromarray(frame.pixels.reshape(frame.height, frame.width), mode="L")
    buffer = io.BytesIO()
    image.save(buffer, format="JPEG", quality=quality)
    return buffer.getvalue()


@dataclass(frozen=True)
class FtpTarget:
    host: str
    port: int
    username: str = "camera"
    password: str = "camera"

    @classmethod
    def parse(cls, text: str, username: str = "camera", password: str = "camera") -> "FtpTarget":
        host, _, port = text.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"expected host:port, got {text!r}")
        return cls(host=host, port=int(port), username=username, password=password)


def run_scenario(
    scenario: Scenario,
    detector_config: DetectorConfig,
    trigger_config: TriggerConfig,
    destination: Optional[FtpTarget] = None,
    seed: int = 0,
    base_time: Optional[float] = None,
) -> ScenarioReport:
    """Run the generate -> detect -> trigger loop, pushing every captured
    frame to the FTP endpoint when one is given.

    With no destination the loop still runs and counts triggers, which is how
    detection grids are swept without a server. A connection failure marks
    the report incomplete but keeps the counts gathered so far.
    """
    if base_time is None:
        base_time = time.time()
    frames = generate(scenario, seed=seed, base_time=base_time)
    machine = TriggerMachine(trigger_config)

    events: list[CaptureEvent] = []
    still = MotionReport(grade=0.0, classification=Classification.NO_MOTION, changed_pixels=0)
    for i, frame in enumerate(frames):
        report = still if i == 0 else detect(frames[i - 1], frame, detector_config)
        event = machine.feed(frame, report, frame.captured_at)
        if event is not None:
            events.append(event)

    transferred = 0
    complete = True
    if destination is not None and events:
        try:
            with FTP() as client:
                client.connect(destination.host, destination.port, timeout=10.0)
                client.login(destination.username, destination.password)
                for k, event in enumerate(events):
                    for j, captured in enumerate(event.frames):
                        payload = io.BytesIO(encode_jpeg(captured))
                        client.storbinary(f"STOR {scenario.name}_{k:03d}_{j:02d}.jpg", payload)
                        transferred += 1
        except ftp_errors + (OSError,):
            complete = False

    return ScenarioReport(
        scenario=scenario.name,
        triggers=len(events),
        images_transferred=transferred,
        images_per_second=transferred / scenario.duration_s,
        complete=complete,
    )


# -- named scenarios ---------------------------------------------------------

_GRID_FRAME = dict(width=160, height=120, fps=10.0, duration_s=6.0)


def named_scenario(name: str) -> Scenario:
    """The stock scenario set: walk / walk_fast / run sweeps, a scene-wide
    light step, and a mirror reflection at 40% scale and contrast."""
    if name in SPEED_PX_PER_FRAME:
        return Scenario(name=name, speed_px=SPEED_PX_PER_FRAME[name], **_GRID_FRAME)
    if name == "light_change":
        return Scenario(name=name, speed_px=0.0, light_step_at_s=3.0, **_GRID_FRAME)
    if name == "mirror":
        return Scenario(name=name, speed_px=SPEED_PX_PER_FRAME["walk_fast"], scale=0.4, **_GRID_FRAME)
    raise KeyError(f"unknown scenario {name!r}; known: {', '.join(scenario_names())}")


def scenario_names() -> list[str]:
    return [*SPEED_PX_PER_FRAME, "light_change", "mirror"]


def scenario_from_file(path: str | Path) -> Scenario:
    """Load a scenario from a line-based key=value file.

    Blocks are written as `WxH+C` (size and contrast) separated by
    semicolons, e.g. `blocks = 30x80+60; 30x80+30`.
    """
    pairs = parse_kv_file(path)
    kwargs: dict = {}
    for key, value in pairs.items():
        if key == "blocks":
            blocks = []
            for chunk in value.split(";"):
                chunk = chunk.strip()
                size, _, contrast = chunk.partition("+")
                w, _, h = size.partition("x")
                blocks.append(MovingBlock(int(w), int(h), int(contrast)))
            kwargs["blocks"] = tuple(blocks)
        elif key in ("name",):
            kwargs[key] = value
        elif key in ("width", "height", "background", "gap_px", "light_step_delta", "noise_amp"):
            kwargs[key] = int(value)
        elif key in ("fps", "duration_s", "speed_px", "scale", "light_step_at_s"):
            kwargs[key] = float(value)
        else:
            raise ValueError(f"unknown scenario key: {key}")
    return Scenario(**kwargs)
