"""Hierarchical two-state distraction detector.

State S1 watches for locomotion with a small-window binary model; once
movement is detected the detector switches to S2, where a larger-window
binary model checks for distraction. A positive S2 result emits an alert
(rate-limited by a reset interval) and drops back to S1; a negative one
drops back silently. Only the active state's model ever does any work.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import matching
from .errors import BadConfig, InsufficientSamples, WindowSizeMismatch
from .matching import DfamModel
from .signal import TimeSeries, Window

S1 = "S1"
S2 = "S2"

MOVING_LABEL = "moving"
STATIONARY_LABEL = "stationary"
DISTRACTED_LABEL = "distracted"
ATTENTIVE_LABEL = "attentive"


def binary_label(activity_name: str, mode: str) -> str:
    """Collapse an activity label for one of the two detector stages."""
    if mode == "movement":
        return MOVING_LABEL if matching.is_moving(activity_name) else STATIONARY_LABEL
    if mode == "distraction":
        return DISTRACTED_LABEL if matching.is_distracted(activity_name) else ATTENTIVE_LABEL
    raise BadConfig(f"unknown binary mode {mode!r}")


def relabel_binary(recordings, mode: str):
    """Relabel (activity, streams) pairs for stage training."""
    return [(binary_label(name, mode), streams) for name, streams in recordings]


@dataclass
class AlertEvent:
    t_ms: int
    detected: str
    window_index: int

    def to_dict(self) -> dict:
        return {"t_ms": self.t_ms, "detected": self.detected,
                "window_index": self.window_index}


@dataclass
class HcarDetector:
    model_s1: DfamModel  # binary moving/stationary, small window
    model_s2: DfamModel  # binary distracted/attentive, larger window
    reset_seconds: float = 10.0
    state: str = S1
    last_alert_t_ms: int | None = None
    work: dict = field(default_factory=lambda: {
        S1: {"signatures": 0, "comparisons": 0},
        S2: {"signatures": 0, "comparisons": 0},
    })

    def __post_init__(self):
        for name, model in (("S1", self.model_s1), ("S2", self.model_s2)):
            if len(model.labels) != 2:
                raise BadConfig(f"{name} model must have exactly 2 labels, "
                                f"got {model.activity_names}")
        if MOVING_LABEL not in self.model_s1.activity_names:
            raise BadConfig(f"S1 model must contain the {MOVING_LABEL!r} label")
        if DISTRACTED_LABEL not in self.model_s2.activity_names:
            raise BadConfig(f"S2 model must contain the {DISTRACTED_LABEL!r} label")
        w1 = self.model_s1.config.window_size
        w2 = self.model_s2.config.window_size
        if w1 > w2:
            raise BadConfig(f"S1 window {w1} must not exceed S2 window {w2}")
        cfg1, cfg2 = self.model_s1.config, self.model_s2.config
        if cfg1.sensors != cfg2.sensors or cfg1.sampling_hz != cfg2.sampling_hz:
            raise BadConfig("stage models must agree on sensor subset and rate")
        if self.reset_seconds <= 0:
            raise BadConfig("reset_seconds must be positive")

    @property
    def active_model(self) -> DfamModel:
        return self.model_s1 if self.state == S1 else self.model_s2

    @property
    def window_size(self) -> int:
        """Window size the next step expects."""
        return self.active_model.config.window_size

    def step(self, windows: dict[str, Window], t_ms: int,
             window_index: int = 0) -> tuple[str, AlertEvent | None]:
        """Consume one aligned window set; returns (new state, alert or None)."""
        model = self.active_model
        cfg = model.config
        for key in cfg.stream_keys:
            if key in windows and windows[key].length != cfg.window_size:
                raise WindowSizeMismatch(
                    f"state {self.state} expects W={cfg.window_size}, "
                    f"got {windows[key].length}"
                )
        sig = matching.build_signature(windows, cfg)
        label, _ = matching.classify(sig, model)
        bucket = self.work[self.state]
        bucket["signatures"] += 1
        bucket["comparisons"] += model.total_instances()

        alert = None
        if self.state == S1:
            if label.name == MOVING_LABEL:
                self.state = S2
        else:
            if label.name == DISTRACTED_LABEL:
                suppressed = (
                    self.last_alert_t_ms is not None
                    and (t_ms - self.last_alert_t_ms) < self.reset_seconds * 1000.0
                )
                if not suppressed:
                    alert = AlertEvent(t_ms, DISTRACTED_LABEL, window_index)
                    self.last_alert_t_ms = t_ms
            self.state = S1
        return self.state, alert


def simulate(detector: HcarDetector, streams: dict[str, TimeSeries]
             ) -> tuple[list[AlertEvent], list[dict], dict]:
    """Replay streams through the detector, window by window.

    Consumes the next W samples of every stream for whichever state is
    active (no overlap during replay). Returns the alerts, a per-step trace
    and the per-state work counters.
    """
    cfg1 = detector.model_s1.config
    keys = cfg1.stream_keys
    for key in keys:
        if key not in streams:
            raise InsufficientSamples(f"stream {key!r} missing from replay set")
    n = min(len(streams[k]) for k in keys)
    if n < detector.model_s1.config.window_size:
        raise InsufficientSamples(
            f"streams have {n} samples, need at least one S1 window"
        )
    alerts: list[AlertEvent] = []
    trace: list[dict] = []
    cursor = 0
    index = 0
    while True:
        w = detector.window_size
        if cursor + w > n:
            break
        state_before = detector.state
        windows = {
            k: Window(streams[k].device, streams[k].sensor, cursor,
                      streams[k].axes[cursor:cursor + w].T.copy())
            for k in keys
        }
        t_ms = int(streams[keys[0]].t_ms[cursor + w - 1])
        state_after, alert = detector.step(windows, t_ms, index)
        if alert is not None:
            alerts.append(alert)
        trace.append({
            "window_index": index,
            "start": cursor,
            "state_before": state_before,
            "state_after": state_after,
            "t_ms": t_ms,
            "alert": alert is not None,
        })
        cursor += w
        index += 1
    return alerts, trace, detector.work
