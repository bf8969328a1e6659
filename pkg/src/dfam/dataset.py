"""CSV stream files and JSON dataset manifests.

A stream file holds one device/sensor recording (`t_ms,x,y,z` header). A
manifest describes one subject's labeled recordings and where their four
stream files live, relative to the manifest itself.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import BadConfig, ConfigMismatch, IoFailure, MissingStream
from .matching import PLACEMENTS, STREAM_KEYS
from .signal import TimeSeries

CSV_HEADER = "t_ms,x,y,z"

_STREAM_PARTS = {
    "phone_accel": ("phone", "accelerometer"),
    "phone_gyro": ("phone", "gyroscope"),
    "watch_accel": ("watch", "accelerometer"),
    "watch_gyro": ("watch", "gyroscope"),
}


def read_stream_csv(path, key: str, sampling_hz: float) -> TimeSeries:
    device, sensor = _STREAM_PARTS[key]
    try:
        raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise IoFailure(f"cannot read stream file {path}: {exc}") from exc
    except ValueError as exc:
        raise BadConfig(f"malformed stream file {path}: {exc}") from exc
    if raw.shape[1] != 4:
        raise BadConfig(f"stream file {path} must have 4 columns, found {raw.shape[1]}")
    return TimeSeries(device, sensor, sampling_hz,
                      raw[:, 0].astype(np.int64), raw[:, 1:4])


def write_stream_csv(path, t_ms: np.ndarray, axes: np.ndarray) -> None:
    rows = np.column_stack([t_ms.astype(np.float64), axes])
    try:
        np.savetxt(path, rows, delimiter=",", header=CSV_HEADER, comments="",
                   fmt=["%d", "%.9g", "%.9g", "%.9g"])
    except OSError as exc:
        raise IoFailure(f"cannot write stream file {path}: {exc}") from exc


@dataclass
class Recording:
    subject: str
    placement: str
    label: str
    streams: dict[str, TimeSeries]


@dataclass
class Dataset:
    recordings: list[Recording]
    provenance: list[str] = field(default_factory=list)

    def subjects(self) -> list[str]:
        return sorted({r.subject for r in self.recordings})

    def labels(self) -> list[str]:
        return sorted({r.label for r in self.recordings})

    def filter_placement(self, tag: str) -> "Dataset":
        if tag == "any":
            return self
        return Dataset([r for r in self.recordings if r.placement == tag],
                       self.provenance)


def load_manifest(path) -> list[Recording]:
    """Read and validate one subject manifest; loads all stream files."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadConfig(f"manifest {path} is not valid JSON: {exc}") from exc

    for field_name in ("subject", "placement", "sampling_hz", "recordings"):
        if field_name not in doc:
            raise BadConfig(f"manifest {path} missing field {field_name!r}")
    subject = doc["subject"]
    placement = doc["placement"]
    hz = float(doc["sampling_hz"])
    if not subject:
        raise BadConfig(f"manifest {path} has an empty subject id")
    if placement not in PLACEMENTS or placement == "any":
        raise BadConfig(f"manifest {path} has unknown placement {placement!r}")
    if hz <= 0:
        raise ConfigMismatch(f"manifest {path} has non-positive sampling_hz")

    base = os.path.dirname(os.path.abspath(path))
    recordings = []
    for entry in doc["recordings"]:
        if "label" not in entry or not entry["label"]:
            raise BadConfig(f"manifest {path} has a recording without a label")
        streams = {}
        for key in STREAM_KEYS:
            if key not in entry:
                raise MissingStream(
                    f"manifest {path} recording {entry['label']!r} lacks {key!r}"
                )
            stream_path = os.path.join(base, entry[key])
            if not os.path.exists(stream_path):
                raise MissingStream(f"stream file {stream_path} does not exist")
            streams[key] = read_stream_csv(stream_path, key, hz)
        recordings.append(Recording(subject, placement, entry["label"], streams))
    return recordings


def load_dataset(paths) -> Dataset:
    """Merge one or more manifests (or directories of manifest*.json)."""
    if isinstance(paths, (str, os.PathLike)):
        paths = [paths]
    manifest_paths = []
    for p in paths:
        if os.path.isdir(p):
            found = sorted(
                os.path.join(p, f) for f in os.listdir(p)
                if f.startswith("manifest") and f.endswith(".json")
            )
            if not found:
                raise BadConfig(f"directory {p} contains no manifest*.json files")
            manifest_paths.extend(found)
        else:
            manifest_paths.append(os.fspath(p))
    recordings = []
    for mp in manifest_paths:
        recordings.extend(load_manifest(mp))
    hz_values = {r.streams[k].sampling_hz for r in recordings for k in STREAM_KEYS}
    if len(hz_values) > 1:
        raise ConfigMismatch(f"manifests disagree on sampling_hz: {sorted(hz_values)}")
    return Dataset(recordings, manifest_paths)
