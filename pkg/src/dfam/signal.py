"""Motion streams, low-pass filtering and sliding-window segmentation.

A stream is one device/sensor pair (e.g. phone accelerometer) sampled at a
fixed rate. Segmentation slices it into fixed-size windows whose starts are
``round(k * W * (1 - r))`` for k = 0, 1, 2, ... while the window still fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadConfig, BadFilterLength, InsufficientSamples

DEVICES = ("phone", "watch")
SENSORS = ("accelerometer", "gyroscope")


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero.

    This is the single rounding rule used throughout segmentation and
    frequency hashing so that outputs are reproducible bit-for-bit.
    """
    if x >= 0:
        m = math.floor(x)
        return m + 1 if x - m >= 0.5 else m
    return -round_half_away(-x)


@dataclass
class TimeSeries:
    """One device/sensor stream of timestamped 3-axis samples."""

    device: str
    sensor: str
    sampling_hz: float
    t_ms: np.ndarray  # int64, strictly increasing
    axes: np.ndarray  # float64, shape (n, 3)

    def __post_init__(self):
        if self.device not in DEVICES:
            raise BadConfig(f"unknown device {self.device!r}")
        if self.sensor not in SENSORS:
            raise BadConfig(f"unknown sensor {self.sensor!r}")
        if self.sampling_hz <= 0:
            raise BadConfig("sampling_hz must be positive")
        self.t_ms = np.asarray(self.t_ms, dtype=np.int64)
        self.axes = np.asarray(self.axes, dtype=np.float64)
        if self.axes.ndim != 2 or self.axes.shape[1] != 3:
            raise BadConfig("axes must have shape (n, 3)")
        if self.t_ms.shape[0] != self.axes.shape[0]:
            raise BadConfig("timestamp and sample counts differ")
        if self.t_ms.size > 1 and not np.all(np.diff(self.t_ms) > 0):
            raise BadConfig("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return self.t_ms.shape[0]


@dataclass
class Window:
    """W consecutive samples of one stream, per axis."""

    device: str
    sensor: str
    start_index: int
    axes: np.ndarray  # shape (3, W)

    @property
    def length(self) -> int:
        return self.axes.shape[1]


@dataclass
class SegmentationConfig:
    """Window size, overlap ratio and moving-average filter length."""

    window_size: int = 128
    overlap_ratio: float = 0.7
    filter_length: int = 1

    def __post_init__(self):
        w = self.window_size
        if w < 8 or (w & (w - 1)) != 0:
            raise BadConfig(f"window_size must be a power of two >= 8, got {w}")
        if not (0 <= self.overlap_ratio < 1):
            raise BadConfig(f"overlap_ratio must be in [0, 1), got {self.overlap_ratio}")
        if self.stride < 1.0:
            raise BadConfig(
                "overlap_ratio too close to 1: stride W*(1-r) must be >= 1 sample"
            )
        if self.filter_length < 1 or self.filter_length % 2 == 0:
            raise BadConfig(f"filter_length must be odd and >= 1, got {self.filter_length}")

    @property
    def stride(self) -> float:
        return self.window_size * (1.0 - self.overlap_ratio)


def lowpass_filter(stream: TimeSeries, length: int) -> TimeSeries:
    """Centered moving average of odd length over each axis.

    Edge samples use the largest symmetric neighborhood that fits, so the
    output has the same length as the input. ``length=1`` is the identity.
    """
    if length % 2 == 0:
        raise BadFilterLength(f"filter length must be odd, got {length}")
    if length < 1 or length > len(stream):
        raise BadFilterLength(
            f"filter length {length} exceeds stream length {len(stream)}"
        )
    if length == 1:
        return TimeSeries(stream.device, stream.sensor, stream.sampling_hz,
                          stream.t_ms.copy(), stream.axes.copy())

    n = len(stream)
    half = length // 2
    csum = np.cumsum(stream.axes, axis=0)
    out = np.empty_like(stream.axes)
    for i in range(n):
        radius = min(half, i, n - 1 - i)
        lo, hi = i - radius, i + radius
        total = csum[hi] - (csum[lo - 1] if lo > 0 else 0.0)
        out[i] = total / (2 * radius + 1)
    return TimeSeries(stream.device, stream.sensor, stream.sampling_hz,
                      stream.t_ms.copy(), out)


def window_offsets(n_samples: int, cfg: SegmentationConfig) -> list[int]:
    """Start offsets round(k * stride) while the window fits in the stream."""
    w = cfg.window_size
    if n_samples < w:
        raise InsufficientSamples(
            f"stream has {n_samples} samples, need at least {w}"
        )
    offsets = []
    k = 0
    while True:
        o = round_half_away(k * cfg.stride)
        if o + w > n_samples:
            break
        offsets.append(o)
        k += 1
    return offsets


def segment(stream: TimeSeries, cfg: SegmentationConfig) -> list[Window]:
    """Slice a (optionally pre-filtered) stream into overlapping windows."""
    if cfg.filter_length > 1:
        stream = lowpass_filter(stream, cfg.filter_length)
    w = cfg.window_size
    return [
        Window(stream.device, stream.sensor, o, stream.axes[o:o + w].T.copy())
        for o in window_offsets(len(stream), cfg)
    ]
