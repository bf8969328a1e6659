"""Deterministic synthetic corpora with known ground truth.

Each synthetic activity is a mixture of sinusoidal tones, one per third of
the usable spectrum on every sensor axis, plus seeded Gaussian noise. Tone
frequencies sit on the FFT grid shared by all power-of-two windows >= 32
(multiples of f_s/32), so the dominant frequency recovered from any such
window is exactly the nominal tone and the corpus doubles as a ground-truth
oracle for the matching pipeline.

Activity frequency tables are written to a `tones.json` sidecar next to the
manifests.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .dataset import write_stream_csv
from .errors import BadConfig, IoFailure
from .features import FeatureVector
from .matching import STREAM_KEYS

GRID_DIVISOR = 32  # tone grid f_s/32 lies on every power-of-two FFT grid >= 32

# Grid multiples per spectrum third, chosen so the three tones of an axis
# land in distinct hash buckets (H2 at f_s=50, g=3) and round() of the tone
# frequency is stable under +-0.35 Hz of jitter and estimation shift.
BAND_CHOICES = ((1, 2, 4), (6, 9, 10), (12, 14, 11))
BAND_AMPLITUDES = (1.0, 0.9, 0.8)

PEDESTRIAN_COMPONENTS = ("standing", "walking", "running",
                         "climbing_stairs", "descending_stairs", "sitting")
DISTRACTIONS = ("texting", "reading", "eating")

# The six-activity default shares tone groups between selected pairs so the
# accelerometer alone cannot separate walking from walking+texting and the
# gyroscope alone cannot separate running from running+texting; together the
# sensors separate everything.
SIX_ACTIVITY_TABLE = (
    ("standing", 0, 0),
    ("walking", 1, 1),
    ("running", 2, 2),
    ("walking+texting", 1, 3),
    ("running+texting", 3, 2),
    ("standing+texting", 4, 4),
)

MAX_ACTIVITIES = 24
PLACEMENT_CYCLE = ("RR", "LL", "RL", "LR")


def activity_table(count: int) -> list[tuple[str, int, int]]:
    """(name, accel tone group, gyro tone group) per synthetic activity."""
    if count < 2 or count > MAX_ACTIVITIES:
        raise BadConfig(f"activity count must be in [2, {MAX_ACTIVITIES}], got {count}")
    if count == len(SIX_ACTIVITY_TABLE):
        return list(SIX_ACTIVITY_TABLE)
    names = list(PEDESTRIAN_COMPONENTS)
    names += [f"{c}+{d}" for d in DISTRACTIONS for c in PEDESTRIAN_COMPONENTS]
    return [(names[i], i, i) for i in range(count)]


def _tone_multiples(group: int, axis: int) -> tuple[int, ...]:
    """Grid multiples of one axis's three tones for a tone group.

    The base-3 digits of a per-(group, axis) code select one tone per band;
    codes differ across groups on every axis, so every group has a distinct
    frequency triple on every axis.
    """
    code = (group + 5 * axis) % 27
    digits = (code % 3, (code // 3) % 3, (code // 9) % 3)
    return tuple(BAND_CHOICES[band][d] for band, d in enumerate(digits))


def activity_tones(count: int, sampling_hz: float) -> dict[str, dict[str, list[float]]]:
    """Nominal tone frequencies (Hz) per activity, per stream axis."""
    grid = sampling_hz / GRID_DIVISOR
    tones = {}
    for name, accel_group, gyro_group in activity_table(count):
        per_axis = {}
        for key in STREAM_KEYS:
            group = accel_group if key.endswith("accel") else gyro_group
            for i, axis in enumerate("xyz"):
                sensor_axis = i if key.startswith("phone") else i + 3
                mult = _tone_multiples(group, sensor_axis)
                per_axis[f"{key}_{axis}"] = [m * grid for m in mult]
        tones[name] = per_axis
    return tones


def _render_stream(tones_hz, n_samples, sampling_hz, noise, rng):
    t = np.arange(n_samples) / sampling_hz
    axes = np.empty((n_samples, 3))
    for i in range(3):
        sig = np.zeros(n_samples)
        for amp, f in zip(BAND_AMPLITUDES, tones_hz[i]):
            phase = rng.uniform(0.0, 2.0 * np.pi)
            sig += amp * np.sin(2.0 * np.pi * f * t + phase)
        if noise > 0:
            sig += rng.normal(0.0, noise, n_samples)
        axes[:, i] = sig
    return axes


def gen_synth(outdir, activities: int = 6, subjects: int = 1,
              duration_s: float = 60.0, sampling_hz: float = 50.0,
              noise: float = 0.25, jitter_hz: float = 0.0,
              seed: int = 0) -> list[str]:
    """Write a synthetic corpus; returns the manifest paths.

    ``jitter_hz`` adds a per-subject, per-axis frequency offset (uniform in
    +-jitter_hz) to every tone, modeling between-subject variation for
    generalized-evaluation experiments.
    """
    if subjects < 1:
        raise BadConfig("need at least one subject")
    n_samples = int(round(duration_s * sampling_hz))
    table = activity_table(activities)
    tones = activity_tones(activities, sampling_hz)
    window_floor = 8
    if n_samples < window_floor:
        raise BadConfig("duration too short for even the smallest window")

    os.makedirs(outdir, exist_ok=True)
    sidecar = {
        "grid_hz": sampling_hz / GRID_DIVISOR,
        "sampling_hz": sampling_hz,
        "noise_sigma": noise,
        "jitter_hz": jitter_hz,
        "seed": seed,
        "band_amplitudes": list(BAND_AMPLITUDES),
        "activities": tones,
    }
    try:
        with open(os.path.join(outdir, "tones.json"), "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write tone sidecar: {exc}") from exc

    t_ms = np.round(np.arange(n_samples) * 1000.0 / sampling_hz).astype(np.int64)
    manifest_paths = []
    for s_idx in range(subjects):
        subject = f"p{s_idx + 1:02d}"
        subject_dir = os.path.join(outdir, subject)
        os.makedirs(subject_dir, exist_ok=True)
        jit_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(0, s_idx)))
        # one frequency offset per sensor axis, shared by that subject's tones
        offsets = jit_rng.uniform(-jitter_hz, jitter_hz, size=(len(STREAM_KEYS), 3))
        entries = []
        for a_idx, (label, _, _) in enumerate(table):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=seed, spawn_key=(1, s_idx, a_idx)))
            entry = {"label": label}
            for k_idx, key in enumerate(STREAM_KEYS):
                per_axis = [
                    [f + offsets[k_idx, i] for f in tones[label][f"{key}_{axis}"]]
                    for i, axis in enumerate("xyz")
                ]
                axes = _render_stream(per_axis, n_samples, sampling_hz, noise, rng)
                fname = f"a{a_idx:02d}_{key}.csv"
                write_stream_csv(os.path.join(subject_dir, fname), t_ms, axes)
                entry[key] = f"{subject}/{fname}"
            entries.append(entry)
        manifest = {
            "subject": subject,
            "placement": PLACEMENT_CYCLE[s_idx % len(PLACEMENT_CYCLE)],
            "sampling_hz": sampling_hz,
            "recordings": entries,
        }
        mpath = os.path.join(outdir, f"manifest_{subject}.json")
        with open(mpath, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
        manifest_paths.append(mpath)
    return manifest_paths


def gaussian_blobs(n_classes: int = 4, per_class: int = 200, dim: int = 5,
                   spread: float = 1.0, separation: float = 8.0,
                   seed: int = 0) -> list[FeatureVector]:
    """Well-separated Gaussian point clouds for classifier smoke benchmarks."""
    if n_classes < 2 or n_classes > dim:
        raise BadConfig("need 2 <= n_classes <= dim")
    rng = np.random.default_rng(seed)
    names = [f"f{i}" for i in range(dim)]
    out = []
    for c in range(n_classes):
        center = np.zeros(dim)
        center[c] = separation
        pts = center + rng.normal(0.0, spread, size=(per_class, dim))
        for row in pts:
            out.append(FeatureVector(values=row.copy(), names=list(names),
                                     label=f"blob{c}"))
    return out
