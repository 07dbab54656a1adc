"""Frame-differencing motion detector.

A motion grade is the fraction of pixels whose absolute luminance change
between two frames exceeds the sensitivity cutoff. The grade is then compared
against the threshold cutoff to decide whether detection is triggered.

Two knobs, mirroring the camera settings they model:

* sensitivity - how small a per-pixel change counts as motion (higher
  sensitivity means a smaller cutoff);
* threshold - how much aggregate change (grade) is needed to trigger
  (higher threshold means a larger cutoff).

All functions are pure and safe to call concurrently.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class FrameDimensionError(ValueError):
    """Raised when two compared frames do not share width and height."""


class FrameValueError(ValueError):
    """Raised when frame pixels are malformed (wrong length or out of range)."""


@dataclass(frozen=True, eq=False)
class Frame:
    """One grayscale image: row-major luminance values plus a capture time.

    ``pixels`` accepts any sequence of integers 0-255 and is stored as a
    flat uint8 array of length ``width * height``. ``captured_at`` is a
    wall-clock timestamp in epoch seconds (millisecond resolution is enough
    for everything downstream).
    """

    width: int
    height: int
    pixels: np.ndarray = field(repr=False)
    captured_at: float = 0.0

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise FrameValueError(f"frame dimensions must be positive: {self.width}x{self.height}")
        arr = np.asarray(self.pixels)
        if arr.ndim == 2:
            arr = arr.reshape(-1)
        if arr.size != self.width * self.height:
            raise FrameValueError(
                f"pixel count {arr.size} does not match {self.width}x{self.height}"
            )
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise FrameValueError("luminance values must lie in 0-255")
        object.__setattr__(self, "pixels", arr.astype(np.uint8, copy=False))

    @property
    def pixel_count(self) -> int:
        return self.width * self.height


class SensitivityLevel(enum.Enum):
    """Per-pixel change cutoff; the enum value is the cutoff in luminance units."""

    LOW = 48
    MODERATE = 24
    HIGH = 8

    @property
    def pixel_delta_cutoff(self) -> int:
        return self.value

    @classmethod
    def from_name(cls, name: str) -> "SensitivityLevel":
        return cls[name.strip().upper()]


class ThresholdLevel(enum.Enum):
    """Grade cutoff; the enum value is the fraction of changed pixels required."""

    LOW = 0.02
    MODERATE = 0.10
    HIGH = 0.25

    @property
    def grade_cutoff(self) -> float:
        return self.value

    @classmethod
    def from_name(cls, name: str) -> "ThresholdLevel":
        return cls[name.strip().upper()]


class Classification(enum.Enum):
    NO_MOTION = "no_motion"
    BELOW_THRESHOLD = "below_threshold"
    TRIGGERED = "triggered"


@dataclass(frozen=True)
class DetectorConfig:
    """Sensitivity/threshold pair, with optional raw-cutoff overrides.

    The numeric cutoffs behind the named levels are calibration constants;
    ``pixel_delta_cutoff`` and ``grade_cutoff`` override them when set
    (a ``grade_cutoff`` above 1.0 disables triggering entirely).
    """

    sensitivity: SensitivityLevel = SensitivityLevel.MODERATE
    threshold: ThresholdLevel = ThresholdLevel.LOW
    pixel_delta_cutoff: int | None = None
    grade_cutoff: float | None = None

    @property
    def effective_pixel_delta_cutoff(self) -> int:
        if self.pixel_delta_cutoff is not None:
            return self.pixel_delta_cutoff
        return self.sensitivity.pixel_delta_cutoff

    @property
    def effective_grade_cutoff(self) -> float:
        if self.grade_cutoff is not None:
            return self.grade_cutoff
        return self.threshold.grade_cutoff


@dataclass(frozen=True)
class MotionReport:
    """Result of comparing one frame pair."""

    grade: float
    classification: Classification
    changed_pixels: int

    @property
    def triggered(self) -> bool:
        return self.classification is Classification.TRIGGERED


def _require_same_shape(prev: Frame, curr: Frame) -> None:
    if prev.width != curr.width or prev.height != curr.height:
        raise FrameDimensionError(
            f"frame dimensions differ: {prev.width}x{prev.height} vs {curr.width}x{curr.height}"
        )


def changed_pixel_count(prev: Frame, curr: Frame, pixel_delta_cutoff: int) -> int:
    """Count pixels whose absolute luminance difference exceeds the cutoff."""
    _require_same_shape(prev, curr)
    diff = np.abs(curr.pixels.astype(np.int16) - prev.pixels.astype(np.int16))
    return int(np.count_nonzero(diff > pixel_delta_cutoff))


def motion_grade(
    prev: Frame,
    curr: Frame,
    sensitivity: SensitivityLevel,
    *,
    pixel_delta_cutoff: int | None = None,
) -> float:
    """Fraction of pixels (0..1) changed by more than the sensitivity cutoff."""
    cutoff = sensitivity.pixel_delta_cutoff if pixel_delta_cutoff is None else pixel_delta_cutoff
    return changed_pixel_count(prev, curr, cutoff) / prev.pixel_count


def classify(
    grade: float,
    threshold: ThresholdLevel,
    *,
    grade_cutoff: float | None = None,
) -> Classification:
    """Map a grade to a detection state.

    Zero grade is no motion; a grade at or below the cutoff is motion that
    does not trigger; only a grade strictly above the cutoff triggers.
    """
    if not 0.0 <= grade <= 1.0:
        raise ValueError(f"grade must lie in [0, 1]: {grade}")
    cutoff = threshold.grade_cutoff if grade_cutoff is None else grade_cutoff
    if grade == 0.0:
        return Classification.NO_MOTION
    if grade <= cutoff:
        return Classification.BELOW_THRESHOLD
    return Classification.TRIGGERED


def detect(prev: Frame, curr: Frame, config: DetectorConfig) -> MotionReport:
    """Compare two frames under one configuration and report the outcome."""
    changed = changed_pixel_count(prev, curr, config.effective_pixel_delta_cutoff)
    grade = changed / prev.pixel_count
    return MotionReport(
        grade=grade,
        classification=classify(grade, config.threshold, grade_cutoff=config.grade_cutoff),
        changed_pixels=changed,
    )
