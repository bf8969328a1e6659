"""Time- and frequency-domain window features for the classical classifiers.

Per axis of every configured stream: mean, min, max, population std and
variance, spectral energy and spectral entropy. Per stream: the RMS of the
three pairwise Pearson correlations. Accelerometer streams additionally get
mean/median/max of instantaneous speed (integrated, mean-removed velocity
magnitude); gyroscope streams get mean/median/max of roll velocity (the
x-axis rate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWindow, IoFailure, ShapeMismatch
from .matching import subset_streams
from .signal import Window

_AXIS_STATS = ("mean", "min", "max", "std", "var", "fft_energy", "fft_entropy")
_EXTRA_STATS = ("mean", "median", "max")


@dataclass
class FeatureVector:
    values: np.ndarray
    names: list[str]
    label: str | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape[0] != len(self.names):
            raise ShapeMismatch("feature values and names have different lengths")
        if not np.all(np.isfinite(self.values)):
            raise ShapeMismatch("feature values must be finite")


def feature_names(sensors: str = "both") -> list[str]:
    """Fixed feature order for a sensor subset."""
    names = []
    for key in subset_streams(sensors):
        for axis in "xyz":
            names.extend(f"{key}_{axis}_{stat}" for stat in _AXIS_STATS)
        names.append(f"{key}_corr_rms")
        extra = "speed" if key.endswith("accel") else "roll"
        names.extend(f"{key}_{extra}_{stat}" for stat in _EXTRA_STATS)
    return names


def _spectral_energy_entropy(axis: np.ndarray) -> tuple[float, float]:
    mags = np.abs(np.fft.rfft(axis))[1:]  # DC excluded
    w = axis.shape[0]
    energy = float(np.sum(mags ** 2) / w)
    total = mags.sum()
    if total <= 0:
        return energy, 0.0
    p = mags / total
    nz = p[p > 0]
    return energy, float(-(nz * np.log(nz)).sum())


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        return 0.0
    return float(((a - a.mean()) * (b - b.mean())).mean() / (sa * sb))


def _corr_rms(axes: np.ndarray) -> float:
    rxy = _pearson(axes[0], axes[1])
    rxz = _pearson(axes[0], axes[2])
    ryz = _pearson(axes[1], axes[2])
    return float(np.sqrt((rxy ** 2 + rxz ** 2 + ryz ** 2) / 3.0))


def _speed_series(axes: np.ndarray, sampling_hz: float) -> np.ndarray:
    # v_i = v_{i-1} + a_i * dt with v_0 = 0, then per-window mean removed
    steps = axes * (1.0 / sampling_hz)
    steps[:, 0] = 0.0
    vel = np.cumsum(steps, axis=1)
    vel -= vel.mean(axis=1, keepdims=True)
    return np.linalg.norm(vel, axis=0)


def extract_features(windows: dict[str, Window], sampling_hz: float,
                     sensors: str = "both", label: str | None = None) -> FeatureVector:
    """Compute the fixed-order feature vector for one aligned window set."""
    keys = subset_streams(sensors)
    for key in keys:
        if key not in windows:
            raise ShapeMismatch(f"window set lacks stream {key!r}")
    lengths = {windows[k].length for k in keys}
    if len(lengths) > 1:
        raise ShapeMismatch(f"window lengths differ: {sorted(lengths)}")
    if lengths.pop() < 2:
        raise DegenerateWindow("windows must have at least 2 samples")

    values = []
    for key in keys:
        axes = windows[key].axes
        for i in range(3):
            ax = axes[i]
            energy, entropy = _spectral_energy_entropy(ax)
            values.extend([ax.mean(), ax.min(), ax.max(), ax.std(), ax.var(),
                           energy, entropy])
        values.append(_corr_rms(axes))
        if key.endswith("accel"):
            series = _speed_series(axes, sampling_hz)
        else:
            series = axes[0]  # roll rate: rotation about the longitudinal axis
        values.extend([series.mean(), float(np.median(series)), series.max()])
    return FeatureVector(np.array(values), feature_names(sensors), label)


def write_features_csv(vectors: list[FeatureVector], path) -> None:
    """Dump labeled feature vectors; header is the feature names plus label."""
    if not vectors:
        raise ShapeMismatch("nothing to write")
    names = vectors[0].names
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(names) + ",label\n")
            for fv in vectors:
                if fv.names != names:
                    raise ShapeMismatch("feature vectors have mixed layouts")
                row = ",".join(f"{v:.9g}" for v in fv.values)
                fh.write(f"{row},{fv.label or ''}\n")
    except OSError as exc:
        raise IoFailure(f"cannot write feature dump {path}: {exc}") from exc
