"""Cross-validation splitters, classification metrics and latency benchmarks.

Folds are built at recording level so overlapping windows never leak between
training and testing. Each fold trains from scratch (including equalization
seeds and k-NN scaling) on its training side only.
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels, matching
from .baselines import Classifier, make_classifier
from .dataset import Dataset, read_stream_csv
from .errors import (BadConfig, BadFoldCount, DfamError, EmptyModel,
                     FoldTrainingFailure, IoFailure, SingleSubject)
from .features import extract_features
from .matching import DfamConfig, DfamModel
from .signal import segment

REPORT_VERSION = "dfam-report/1"


def fold_seed(master_seed: int, fold_index: int) -> int:
    """Deterministic per-fold seed derived from the master seed."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(fold_index,))
    return int(ss.generate_state(1)[0])


def kfold_split(n_items: int, k: int, seed: int) -> list[tuple[list[int], list[int]]]:
    """Seeded shuffle into k folds whose sizes differ by at most one."""
    if k < 2 or k > n_items:
        raise BadFoldCount(f"need 2 <= k <= {n_items}, got k={k}")
    perm = np.random.default_rng(seed).permutation(n_items)
    sizes = [n_items // k + (1 if f < n_items % k else 0) for f in range(k)]
    folds = []
    pos = 0
    for size in sizes:
        test = sorted(int(i) for i in perm[pos:pos + size])
        train = sorted(set(range(n_items)) - set(test))
        folds.append((train, test))
        pos += size
    return folds


def loso_split(dataset: Dataset) -> list[tuple[list[int], list[int], str]]:
    """One fold per subject: that subject's recordings become the test side."""
    subjects = dataset.subjects()
    if len(subjects) < 2:
        raise SingleSubject(f"leave-one-subject-out needs >= 2 subjects, got {subjects}")
    folds = []
    for held in subjects:
        test = [i for i, r in enumerate(dataset.recordings) if r.subject == held]
        train = [i for i, r in enumerate(dataset.recordings) if r.subject != held]
        folds.append((train, test, held))
    return folds


@dataclass
class EvalReport:
    accuracy: float
    labels: list[str]
    confusion: list[list[int]]  # rows: true label, columns: predicted
    per_fold: list[float]
    protocol: str
    classifier: str
    config: dict
    timing: dict | None = None
    fold_details: list[dict] = field(default_factory=list)

    @property
    def mean_fold_accuracy(self) -> float:
        return float(np.mean(self.per_fold)) if self.per_fold else 0.0

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "accuracy": self.accuracy,
            "mean_fold_accuracy": self.mean_fold_accuracy,
            "labels": self.labels,
            "confusion": self.confusion,
            "per_fold": self.per_fold,
            "protocol": self.protocol,
            "classifier": self.classifier,
            "config": self.config,
            "timing": self.timing,
            "fold_details": self.fold_details,
        }

    def save(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(self.to_dict(), fh, sort_keys=True, indent=2)
                fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"cannot write report {path}: {exc}") from exc

    def confusion_csv(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("true\\predicted," + ",".join(self.labels) + "\n")
                for name, row in zip(self.labels, self.confusion):
                    fh.write(name + "," + ",".join(str(v) for v in row) + "\n")
        except OSError as exc:
            raise IoFailure(f"cannot write confusion csv {path}: {exc}") from exc


def _signatures_per_recording(dataset: Dataset, cfg: DfamConfig):
    """Signature list per recording; fold-independent, so computed once."""
    return [matching.recording_signatures(r.streams, cfg)
            for r in dataset.recordings]


def _features_per_recording(dataset: Dataset, cfg: DfamConfig):
    seg_cfg = cfg.segmentation()
    out = []
    for rec in dataset.recordings:
        per_stream = {k: segment(rec.streams[k], seg_cfg) for k in cfg.stream_keys}
        n = min(len(v) for v in per_stream.values())
        out.append([
            extract_features({k: per_stream[k][w] for k in cfg.stream_keys},
                             cfg.sampling_hz, cfg.sensors)
            for w in range(n)
        ])
    return out


def _train_dfam_fold(dataset, per_recording, train_idx, cfg, seed):
    fold_cfg = DfamConfig(**{**cfg.to_dict(), "seed": seed})
    by_activity = {}
    for i in train_idx:
        label = dataset.recordings[i].label
        by_activity.setdefault(label, []).extend(
            sig.axes for sig in per_recording[i])
    return matching.train_from_signatures(by_activity, fold_cfg)


def evaluate(dataset: Dataset, classifier, cfg: DfamConfig,
             protocol: str = "kfold", k: int = 10, seed: int = 0,
             hyperparams: dict | None = None) -> EvalReport:
    """Cross-validate a classifier over a dataset of labeled recordings.

    ``classifier`` is "dfam", a baseline kind, or a zero-argument factory
    returning a fit/predict object; non-dfam classifiers run on the feature
    extraction pipeline with the same windowing config.
    """
    labels = dataset.labels()
    if protocol == "kfold":
        folds = [(tr, te, str(f)) for f, (tr, te)
                 in enumerate(kfold_split(len(dataset.recordings), k, seed))]
    elif protocol == "loso":
        folds = loso_split(dataset)
    else:
        raise BadFoldCount(f"unknown protocol {protocol!r}")

    index = {name: i for i, name in enumerate(labels)}
    if classifier == "dfam":
        per_recording = _signatures_per_recording(dataset, cfg)
    else:
        per_recording = _features_per_recording(dataset, cfg)
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    per_fold = []
    fold_details = []
    for f_idx, (train_idx, test_idx, fold_name) in enumerate(folds):
        seed_f = fold_seed(seed, f_idx)
        try:
            if classifier == "dfam":
                model = _train_dfam_fold(dataset, per_recording, train_idx,
                                         cfg, seed_f)
                tests = [(dataset.recordings[i].label, sig)
                         for i in test_idx for sig in per_recording[i]]
                predicted, _ = matching.classify_batch([s for _, s in tests], model)
                pred_names = [p.name for p in predicted]
            else:
                train_fvs = []
                for i in train_idx:
                    label = dataset.recordings[i].label
                    for fv in per_recording[i]:
                        fv.label = label
                        train_fvs.append(fv)
                if callable(classifier):
                    clf = classifier()
                else:
                    hp = dict(hyperparams or {})
                    if classifier == "random_forest":
                        hp.setdefault("seed", seed_f)
                    clf: Classifier = make_classifier(classifier, **hp)
                clf.fit(train_fvs)
                tests = []
                for i in test_idx:
                    label = dataset.recordings[i].label
                    for fv in per_recording[i]:
                        fv.label = label
                        tests.append((label, fv))
                pred_names = [clf.predict(fv).name for _, fv in tests]
        except DfamError as exc:
            raise FoldTrainingFailure(f"fold {fold_name}: {exc}") from exc
        hits = 0
        for (true_name, _), pred in zip(tests, pred_names):
            confusion[index[true_name], index[pred]] += 1
            hits += int(pred == true_name)
        fold_acc = hits / len(tests) if tests else 0.0
        per_fold.append(fold_acc)
        fold_details.append({"fold": fold_name, "test_windows": len(tests),
                             "accuracy": fold_acc})

    total = int(confusion.sum())
    accuracy = float(np.trace(confusion) / total) if total else 0.0
    return EvalReport(
        accuracy=accuracy,
        labels=labels,
        confusion=confusion.tolist(),
        per_fold=per_fold,
        protocol=protocol,
        classifier=classifier if isinstance(classifier, str)
        else getattr(classifier, "__name__", "custom"),
        config=cfg.to_dict(),
        fold_details=fold_details,
    )


def bench_response(model: DfamModel, stream_paths: dict[str, str],
                   repetitions: int = 10, backends: list[str] | None = None,
                   sink=None) -> list[dict]:
    """Per-stage wall-clock timing of the full window pipeline.

    Stages: read stream CSVs, filter+segment, signature generation,
    classification of every window, and notification (one alert record per
    repetition appended to ``sink``; an in-memory sink is used when none is
    given so the stage always does real serialization work). One record per
    repetition and kernel backend, times in milliseconds.
    """
    if repetitions < 1:
        raise BadConfig("repetitions must be >= 1")
    if not model.labels or model.total_instances() == 0:
        raise EmptyModel("model has no training signatures")
    if sink is None:
        sink = io.StringIO()
    cfg = model.config
    backends = backends or [kernels.BACKEND]
    records = []
    for backend_name in backends:
        backend = kernels.get_backend(backend_name)
        sigs, starts, lut = model.stacked()
        s, g = cfg.axis_count, cfg.bins
        for rep in range(repetitions):
            t0 = time.perf_counter()
            streams = {key: read_stream_csv(path, key, cfg.sampling_hz)
                       for key, path in stream_paths.items()
                       if key in cfg.stream_keys}
            t1 = time.perf_counter()
            seg_cfg = cfg.segmentation()
            per_stream = {k: segment(streams[k], seg_cfg) for k in cfg.stream_keys}
            n = min(len(v) for v in per_stream.values())
            t2 = time.perf_counter()
            tests = [
                matching.build_signature(
                    {k: per_stream[k][i] for k in cfg.stream_keys}, cfg)
                for i in range(n)
            ]
            t3 = time.perf_counter()
            flat = np.ascontiguousarray(
                np.stack([t.axes.reshape(-1) for t in tests]), dtype=np.int32)
            scores = backend.aggregate_scores_batch(flat, sigs, starts, s, g, lut)
            picks = np.argmax(scores, axis=1)
            t4 = time.perf_counter()
            last = model.labels[int(picks[-1])].name
            sink.write(json.dumps({"repetition": rep, "detected": last},
                                  sort_keys=True) + "\n")
            t5 = time.perf_counter()
            records.append({
                "repetition": rep,
                "backend": backend_name,
                "windows": n,
                "read_ms": (t1 - t0) * 1e3,
                "process_ms": (t2 - t1) * 1e3,
                "signature_ms": (t3 - t2) * 1e3,
                "classify_ms": (t4 - t3) * 1e3,
                "classify_per_window_ms": (t4 - t3) * 1e3 / max(n, 1),
                "notify_ms": (t5 - t4) * 1e3,
                "total_ms": (t5 - t0) * 1e3,
            })
    return records


def bench_summary(records: list[dict]) -> dict:
    """min/mean/max per stage, grouped by backend."""
    stages = ("read_ms", "process_ms", "signature_ms", "classify_ms",
              "classify_per_window_ms", "notify_ms", "total_ms")
    out = {}
    for backend in sorted({r["backend"] for r in records}):
        rows = [r for r in records if r["backend"] == backend]
        out[backend] = {
            stage: {
                "min": min(r[stage] for r in rows),
                "mean": sum(r[stage] for r in rows) / len(rows),
                "max": max(r[stage] for r in rows),
            }
            for stage in stages
        }
    return out
