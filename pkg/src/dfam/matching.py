"""Signature construction, model training, scoring and classification.

A window's signature is one hashed dominant-frequency tuple per sensor axis,
in a fixed axis order. Matching a test signature against a stored training
instance counts the axes whose tuples agree exactly; m matching axes out of
s score (m/s)^s, so multi-axis agreement is weighted exponentially. A test
window is classified as the activity with the highest score sum over all of
its training instances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (BadConfig, ConfigMismatch, CorruptModel, EmptyActivity,
                     EmptyModel, IoFailure, MisalignedWindows, MissingStream,
                     ShapeMismatch)
from .signal import SegmentationConfig, TimeSeries, Window, segment
from .spectral import HASH_IDS, HashSpec, dft_magnitude, dominant_frequencies, hash_tuple

MODEL_VERSION = "dfam/1"

STREAM_KEYS = ("phone_accel", "phone_gyro", "watch_accel", "watch_gyro")
SENSOR_SUBSETS = ("accel", "gyro", "both")
PLACEMENTS = ("RR", "RL", "LR", "LL", "any")

KINDS = ("simple_pedestrian", "concurrent_nondistracted", "concurrent_distracted")

# Pedestrian components that count as locomotion for the two-state detector.
MOVING_COMPONENTS = {"walking", "running", "climbing_stairs", "descending_stairs"}
STATIONARY_COMPONENTS = {"standing", "sitting"}


def subset_streams(sensors: str) -> tuple[str, ...]:
    """Stream keys used by a sensor subset, in fixed axis order."""
    if sensors == "accel":
        return ("phone_accel", "watch_accel")
    if sensors == "gyro":
        return ("phone_gyro", "watch_gyro")
    if sensors == "both":
        return STREAM_KEYS
    raise BadConfig(f"unknown sensor subset {sensors!r}")


def label_kind(name: str) -> str:
    """Infer the activity kind from a 'pedestrian+distraction' label name."""
    if "+" not in name:
        return "simple_pedestrian"
    component = name.split("+", 1)[0]
    if component in STATIONARY_COMPONENTS:
        return "concurrent_nondistracted"
    return "concurrent_distracted"


def is_moving(name: str) -> bool:
    return name.split("+", 1)[0] in MOVING_COMPONENTS


def is_distracted(name: str) -> bool:
    return label_kind(name) == "concurrent_distracted"


@dataclass(frozen=True)
class ActivityLabel:
    name: str
    kind: str

    def __post_init__(self):
        if not self.name:
            raise BadConfig("activity name must be non-empty")
        if self.kind not in KINDS:
            raise BadConfig(f"unknown activity kind {self.kind!r}")


@dataclass
class WindowSignature:
    """Per-axis hashed dominant-frequency tuples for one aligned window set."""

    axes: np.ndarray  # int32, shape (s, g)

    def __post_init__(self):
        self.axes = np.ascontiguousarray(self.axes, dtype=np.int32)
        if self.axes.ndim != 2:
            raise ShapeMismatch("signature axes must be a 2-d (s, g) array")

    @property
    def axis_count(self) -> int:
        return self.axes.shape[0]

    @property
    def bins(self) -> int:
        return self.axes.shape[1]


@dataclass
class DfamConfig:
    """Everything needed to rebuild signatures compatible with a model."""

    window_size: int = 128
    overlap_ratio: float = 0.7
    bins: int = 3
    hash_id: str = "H2"
    sampling_hz: float = 50.0
    sensors: str = "both"
    placement: str = "any"
    filter_length: int = 1
    seed: int = 0

    def __post_init__(self):
        SegmentationConfig(self.window_size, self.overlap_ratio, self.filter_length)
        if self.hash_id not in HASH_IDS:
            raise BadConfig(f"unknown hash id {self.hash_id!r}")
        if self.sensors not in SENSOR_SUBSETS:
            raise BadConfig(f"unknown sensor subset {self.sensors!r}")
        if self.placement not in PLACEMENTS:
            raise BadConfig(f"unknown placement tag {self.placement!r}")
        if not (1 <= self.bins <= self.window_size // 2):
            raise BadConfig(f"bins must be in [1, W/2], got {self.bins}")

    @property
    def stream_keys(self) -> tuple[str, ...]:
        return subset_streams(self.sensors)

    @property
    def axis_count(self) -> int:
        return 3 * len(self.stream_keys)

    def hash_spec(self) -> HashSpec:
        return HashSpec(self.hash_id, self.sampling_hz, self.window_size, self.bins)

    def segmentation(self) -> SegmentationConfig:
        return SegmentationConfig(self.window_size, self.overlap_ratio, self.filter_length)

    def to_dict(self) -> dict:
        return {
            "window_size": self.window_size,
            "overlap_ratio": self.overlap_ratio,
            "bins": self.bins,
            "hash_id": self.hash_id,
            "sampling_hz": self.sampling_hz,
            "sensors": self.sensors,
            "placement": self.placement,
            "filter_length": self.filter_length,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DfamConfig":
        return cls(**d)


@dataclass(eq=False)
class DfamModel:
    """Labeled signature store; activities kept in sorted-name order."""

    config: DfamConfig
    labels: list[ActivityLabel]
    signatures: dict[str, np.ndarray]  # name -> int32 (n_j, s, g)
    version: str = MODEL_VERSION
    _stack: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.labels = sorted(self.labels, key=lambda l: l.name)
        for name, sigs in self.signatures.items():
            self.signatures[name] = np.ascontiguousarray(sigs, dtype=np.int32)

    @property
    def activity_names(self) -> list[str]:
        return [l.name for l in self.labels]

    def instance_counts(self) -> dict[str, int]:
        return {l.name: int(self.signatures[l.name].shape[0]) for l in self.labels}

    def total_instances(self) -> int:
        return sum(self.instance_counts().values())

    def stacked(self):
        """(sigs (N, s*g), act_starts (n+1,), lut (s+1,)) for the kernels."""
        if self._stack is None:
            s = self.config.axis_count
            g = self.config.bins
            blocks = [self.signatures[l.name].reshape(-1, s * g) for l in self.labels]
            counts = [b.shape[0] for b in blocks]
            sigs = (np.concatenate(blocks) if blocks
                    else np.empty((0, s * g), dtype=np.int32))
            starts = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
            lut = np.array([(m / s) ** s for m in range(s + 1)])
            self._stack = (np.ascontiguousarray(sigs, dtype=np.int32), starts, lut)
        return self._stack


def score(test: WindowSignature, train_instance: WindowSignature) -> float:
    """(m/s)^s where m counts axes whose g-tuples agree exactly."""
    if test.axes.shape != train_instance.axes.shape:
        raise ShapeMismatch(
            f"signature shapes differ: {test.axes.shape} vs {train_instance.axes.shape}"
        )
    s = test.axis_count
    m = int((test.axes == train_instance.axes).all(axis=1).sum())
    return (m / s) ** s


def build_signature(windows: dict[str, Window], cfg: DfamConfig) -> WindowSignature:
    """Hash each axis of an aligned window set into one signature.

    ``windows`` maps stream key to that stream's k-th window; all configured
    streams must be present and share the same start index.
    """
    spec = cfg.hash_spec()
    keys = cfg.stream_keys
    for key in keys:
        if key not in windows:
            raise MissingStream(f"stream {key!r} required by sensor subset {cfg.sensors!r}")
    starts = {windows[k].start_index for k in keys}
    if len(starts) > 1:
        raise MisalignedWindows(f"window start indices differ: {sorted(starts)}")
    rows = []
    for key in keys:
        win = windows[key]
        if win.length != cfg.window_size:
            raise ShapeMismatch(
                f"window length {win.length} != configured {cfg.window_size}"
            )
        for axis in win.axes:
            spectrum = dft_magnitude(axis, cfg.sampling_hz)
            df = dominant_frequencies(spectrum, cfg.bins, cfg.sampling_hz)
            rows.append(hash_tuple(df, spec))
    return WindowSignature(np.stack(rows))


def recording_signatures(streams: dict[str, TimeSeries], cfg: DfamConfig) -> list[WindowSignature]:
    """Segment one recording's streams and build every aligned signature.

    Streams are paired window-index by window-index; if their window counts
    differ the extra trailing windows are dropped.
    """
    seg_cfg = cfg.segmentation()
    per_stream: dict[str, list[Window]] = {}
    for key in cfg.stream_keys:
        if key not in streams or streams[key] is None:
            raise MissingStream(f"stream {key!r} required by sensor subset {cfg.sensors!r}")
        ts = streams[key]
        if ts.sampling_hz != cfg.sampling_hz:
            raise ConfigMismatch(
                f"stream {key!r} sampled at {ts.sampling_hz} Hz, model expects {cfg.sampling_hz}"
            )
        if len(ts) < cfg.window_size:
            per_stream[key] = []
        else:
            per_stream[key] = segment(ts, seg_cfg)
    n = min(len(v) for v in per_stream.values())
    return [
        build_signature({k: per_stream[k][i] for k in cfg.stream_keys}, cfg)
        for i in range(n)
    ]


def train(recordings: list[tuple[str, dict[str, TimeSeries]]], cfg: DfamConfig,
          max_per_activity: int | None = None) -> DfamModel:
    """Build an equalized model from labeled recordings.

    Each recording is (label name, streams). Per-activity signature lists are
    downsampled (seeded, without replacement) to the smallest activity's
    count, or to ``max_per_activity`` if that is smaller.
    """
    by_activity: dict[str, list[np.ndarray]] = {}
    for name, streams in recordings:
        sigs = recording_signatures(streams, cfg)
        by_activity.setdefault(name, []).extend(sig.axes for sig in sigs)
    return train_from_signatures(by_activity, cfg, max_per_activity)


def train_from_signatures(by_activity: dict[str, list[np.ndarray]], cfg: DfamConfig,
                          max_per_activity: int | None = None) -> DfamModel:
    """Equalize pre-built per-activity signature lists into a model."""
    for name, sigs in by_activity.items():
        if not sigs:
            raise EmptyActivity(f"activity {name!r} yielded no windows")
    if not by_activity:
        raise EmptyActivity("no recordings given")

    target = min(len(v) for v in by_activity.values())
    if max_per_activity is not None:
        target = min(target, max_per_activity)
    rng = np.random.default_rng(cfg.seed)
    signatures = {}
    for name in sorted(by_activity):
        stack = np.stack(by_activity[name])
        if stack.shape[0] > target:
            keep = np.sort(rng.choice(stack.shape[0], size=target, replace=False))
            stack = stack[keep]
        signatures[name] = stack.astype(np.int32)
    labels = [ActivityLabel(name, label_kind(name)) for name in sorted(by_activity)]
    return DfamModel(cfg, labels, signatures)


def _check_test_shape(test: WindowSignature, model: DfamModel):
    s, g = model.config.axis_count, model.config.bins
    if test.axes.shape != (s, g):
        raise ShapeMismatch(
            f"test signature shape {test.axes.shape} does not match model ({s}, {g})"
        )


def classify(test: WindowSignature, model: DfamModel) -> tuple[ActivityLabel, dict[str, float]]:
    """Label with the highest aggregate score; ties go to the smaller name.

    Also returns the full per-activity score table for diagnostics.
    """
    if not model.labels or model.total_instances() == 0:
        raise EmptyModel("model has no training signatures")
    _check_test_shape(test, model)
    sigs, starts, lut = model.stacked()
    s, g = model.config.axis_count, model.config.bins
    scores = kernels.aggregate_scores(test.axes.reshape(-1), sigs, starts, s, g, lut)
    best = int(np.argmax(scores))  # labels sorted by name, argmax takes the first max
    table = {l.name: float(v) for l, v in zip(model.labels, scores)}
    return model.labels[best], table


def majority_label(labels: list[ActivityLabel]) -> ActivityLabel:
    """Stream-level majority vote over per-window labels; ties -> smaller name.

    Optional post-step: classification is per window by default.
    """
    if not labels:
        raise EmptyModel("no window labels to vote over")
    counts: dict[str, int] = {}
    for label in labels:
        counts[label.name] = counts.get(label.name, 0) + 1
    winner = min(counts, key=lambda n: (-counts[n], n))
    return next(l for l in labels if l.name == winner)


def classify_batch(tests: list[WindowSignature], model: DfamModel) -> tuple[list[ActivityLabel], np.ndarray]:
    """Classify many signatures at once; returns labels and the score matrix."""
    if not model.labels or model.total_instances() == 0:
        raise EmptyModel("model has no training signatures")
    for t in tests:
        _check_test_shape(t, model)
    if not tests:
        return [], np.empty((0, len(model.labels)))
    sigs, starts, lut = model.stacked()
    s, g = model.config.axis_count, model.config.bins
    flat = np.ascontiguousarray(
        np.stack([t.axes.reshape(-1) for t in tests]), dtype=np.int32
    )
    scores = kernels.aggregate_scores_batch(flat, sigs, starts, s, g, lut)
    picks = np.argmax(scores, axis=1)
    return [model.labels[int(i)] for i in picks], scores


def save_model(model: DfamModel, path) -> None:
    doc = {
        "version": model.version,
        "config": model.config.to_dict(),
        "activities": [
            {
                "label": l.name,
                "kind": l.kind,
                "signatures": model.signatures[l.name].tolist(),
            }
            for l in model.labels
        ],
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write model file {path}: {exc}") from exc


def _parse_model_doc(doc: dict) -> DfamModel:
    if not isinstance(doc, dict) or doc.get("version") != MODEL_VERSION:
        raise CorruptModel(
            f"unsupported model version {doc.get('version')!r}, expected {MODEL_VERSION!r}"
        )
    try:
        cfg = DfamConfig.from_dict(doc["config"])
        labels = []
        signatures = {}
        for entry in doc["activities"]:
            labels.append(ActivityLabel(entry["label"], entry["kind"]))
            sigs = np.asarray(entry["signatures"], dtype=np.int32)
            if sigs.size == 0:
                sigs = np.empty((0, cfg.axis_count, cfg.bins), dtype=np.int32)
            if sigs.ndim != 3 or sigs.shape[1:] != (cfg.axis_count, cfg.bins):
                raise CorruptModel(
                    f"activity {entry['label']!r} signatures have shape {sigs.shape}"
                )
            signatures[entry["label"]] = sigs
    except (KeyError, TypeError, ValueError, BadConfig) as exc:
        raise CorruptModel(f"malformed model file: {exc}") from exc
    return DfamModel(cfg, labels, signatures)


def load_model(path) -> DfamModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"model file {path} is not valid JSON: {exc}") from exc
    return _parse_model_doc(doc)


def append_signature(path, name: str, signature: WindowSignature, kind: str | None = None) -> None:
    """Insert one labeled signature into a saved model file.

    Existing records are left untouched; an unknown label adds a new
    activity entry. This is the lightweight online-update path.
    """
    model = load_model(path)
    _check_test_shape(signature, model)
    rows = signature.axes[np.newaxis]
    if name in model.signatures:
        model.signatures[name] = np.concatenate([model.signatures[name], rows])
    else:
        model.labels.append(ActivityLabel(name, kind or label_kind(name)))
        model.labels.sort(key=lambda l: l.name)
        model.signatures[name] = rows.astype(np.int32)
    model._stack = None
    save_model(model, path)
