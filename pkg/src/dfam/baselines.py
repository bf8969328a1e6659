"""From-scratch classical classifiers over feature vectors.

Gaussian naive Bayes, a Gini CART decision tree, a random forest of such
trees, and k-nearest neighbours with min-max feature scaling fitted on the
training data only. All prediction ties resolve to the lexicographically
smallest label. An SVM slot exists in ``CLASSIFIER_KINDS`` but no
implementation ships; third parties can register one.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import (BadConfig, CorruptModel, DegenerateTrainingSet,
                     DimensionMismatch, IoFailure, NotFitted)
from .features import FeatureVector
from .matching import ActivityLabel, label_kind

CLASSIFIER_VERSION = "dfam-clf/1"
CLASSIFIER_KINDS = ("naive_bayes", "decision_tree", "random_forest", "knn", "svm")


def _as_matrix(training: list[FeatureVector]) -> tuple[np.ndarray, np.ndarray, list[str]]:
    if not training:
        raise DegenerateTrainingSet("no training vectors")
    dim = training[0].values.shape[0]
    classes = sorted({fv.label for fv in training if fv.label is not None})
    if len(classes) < 2:
        raise DegenerateTrainingSet(f"need >= 2 classes, got {classes}")
    if any(fv.label is None for fv in training):
        raise DegenerateTrainingSet("every training vector needs a label")
    x = np.empty((len(training), dim))
    y = np.empty(len(training), dtype=np.int64)
    index = {name: i for i, name in enumerate(classes)}
    for i, fv in enumerate(training):
        if fv.values.shape[0] != dim:
            raise DimensionMismatch("training vectors have mixed dimensionality")
        x[i] = fv.values
        y[i] = index[fv.label]
    return x, y, classes


class Classifier:
    """Uniform fit/predict interface; subclasses fill _fit and _predict_row."""

    kind = "base"

    def __init__(self):
        self.classes_: list[str] | None = None
        self.dim_: int | None = None

    def fit(self, training: list[FeatureVector]):
        x, y, classes = _as_matrix(training)
        self.classes_ = classes
        self.dim_ = x.shape[1]
        self._fit(x, y)
        return self

    def predict(self, fv: FeatureVector) -> ActivityLabel:
        row = self._check(fv)
        name = self.classes_[self._predict_row(row)]
        return ActivityLabel(name, label_kind(name))

    def predict_many(self, fvs: list[FeatureVector]) -> list[ActivityLabel]:
        return [self.predict(fv) for fv in fvs]

    def _check(self, fv: FeatureVector) -> np.ndarray:
        if self.classes_ is None:
            raise NotFitted(f"{self.kind} classifier is not fitted")
        if fv.values.shape[0] != self.dim_:
            raise DimensionMismatch(
                f"feature vector has {fv.values.shape[0]} entries, model expects {self.dim_}"
            )
        return fv.values

    def _fit(self, x, y):
        raise NotImplementedError

    def _predict_row(self, row) -> int:
        raise NotImplementedError


class NaiveBayes(Classifier):
    """Gaussian likelihoods per class and feature, empirical priors."""

    kind = "naive_bayes"

    def __init__(self, variance_floor: float = 1e-9):
        super().__init__()
        self.variance_floor = variance_floor
        self.means_ = None
        self.variances_ = None
        self.log_priors_ = None

    def _fit(self, x, y):
        n_classes = len(self.classes_)
        self.means_ = np.empty((n_classes, self.dim_))
        self.variances_ = np.empty((n_classes, self.dim_))
        self.log_priors_ = np.empty(n_classes)
        for c in range(n_classes):
            rows = x[y == c]
            self.means_[c] = rows.mean(axis=0)
            self.variances_[c] = np.maximum(rows.var(axis=0), self.variance_floor)
            self.log_priors_[c] = math.log(rows.shape[0] / x.shape[0])

    def log_posteriors(self, row: np.ndarray) -> np.ndarray:
        ll = -0.5 * (np.log(2.0 * np.pi * self.variances_)
                     + (row - self.means_) ** 2 / self.variances_).sum(axis=1)
        return self.log_priors_ + ll

    def _predict_row(self, row) -> int:
        return int(np.argmax(self.log_posteriors(row)))  # first max = smallest name


class DecisionTree(Classifier):
    """Binary CART on Gini impurity; thresholds at midpoints of sorted uniques."""

    kind = "decision_tree"

    def __init__(self, max_depth: int = 12, min_split: int = 2):
        super().__init__()
        if max_depth < 0 or min_split < 2:
            raise BadConfig("max_depth must be >= 0 and min_split >= 2")
        self.max_depth = max_depth
        self.min_split = min_split
        self.root_ = None

    def _fit(self, x, y):
        self.root_ = _grow(x, y, len(self.classes_), 0, self.max_depth,
                           self.min_split, None)

    def _predict_row(self, row) -> int:
        node = self.root_
        while "leaf" not in node:
            node = node["lo"] if row[node["feature"]] <= node["threshold"] else node["hi"]
        return node["leaf"]


def _gini_counts(counts: np.ndarray, total: int) -> float:
    if total == 0:
        return 0.0
    p = counts / total
    return 1.0 - float((p * p).sum())


def _best_split(x, y, n_classes, feature_ids):
    """(feature, threshold, gain) of the best Gini split, or None.

    Features are scanned in the given order and thresholds ascending;
    only strictly better gains replace the incumbent, which makes the
    result deterministic.
    """
    n = x.shape[0]
    parent_counts = np.bincount(y, minlength=n_classes)
    parent_gini = _gini_counts(parent_counts, n)
    best = None
    for f in feature_ids:
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y[order]] = 1.0
        prefix = np.cumsum(onehot, axis=0)  # class counts through each sorted row
        boundaries = np.nonzero(np.diff(xs) != 0)[0]  # split after row i
        if boundaries.size == 0:
            continue
        left_n = boundaries + 1
        right_n = n - left_n
        left_counts = prefix[boundaries]
        right_counts = parent_counts - left_counts
        gini_l = 1.0 - ((left_counts / left_n[:, None]) ** 2).sum(axis=1)
        gini_r = 1.0 - ((right_counts / right_n[:, None]) ** 2).sum(axis=1)
        gains = parent_gini - (left_n * gini_l + right_n * gini_r) / n
        i = int(np.argmax(gains))  # earliest threshold wins ties
        gain = float(gains[i])
        if gain > 1e-15 and (best is None or gain > best[2]):
            b = boundaries[i]
            best = (f, (xs[b] + xs[b + 1]) / 2.0, gain)
    return best


def _majority(y, n_classes) -> int:
    return int(np.argmax(np.bincount(y, minlength=n_classes)))  # tie -> smallest name


def _grow(x, y, n_classes, depth, max_depth, min_split, rng, n_feature_sample=None):
    if (depth >= max_depth or x.shape[0] < min_split
            or np.unique(y).shape[0] == 1):
        return {"leaf": _majority(y, n_classes)}
    if rng is not None and n_feature_sample is not None:
        feature_ids = np.sort(rng.choice(x.shape[1], size=n_feature_sample,
                                         replace=False))
    else:
        feature_ids = range(x.shape[1])
    split = _best_split(x, y, n_classes, feature_ids)
    if split is None:
        return {"leaf": _majority(y, n_classes)}
    f, t, _ = split
    mask = x[:, f] <= t
    return {
        "feature": int(f),
        "threshold": float(t),
        "lo": _grow(x[mask], y[mask], n_classes, depth + 1, max_depth,
                    min_split, rng, n_feature_sample),
        "hi": _grow(x[~mask], y[~mask], n_classes, depth + 1, max_depth,
                    min_split, rng, n_feature_sample),
    }


class RandomForest(Classifier):
    """Bagged Gini trees with per-split feature subsampling, majority vote.

    With bootstrap off, a single tree and the full feature set, the forest
    is exactly one DecisionTree.
    """

    kind = "random_forest"

    def __init__(self, tree_count: int = 50, max_depth: int = 12,
                 min_split: int = 2, seed: int = 0, bootstrap: bool = True,
                 feature_subsample: bool = True):
        super().__init__()
        if tree_count < 1:
            raise BadConfig("tree_count must be >= 1")
        self.tree_count = tree_count
        self.max_depth = max_depth
        self.min_split = min_split
        self.seed = seed
        self.bootstrap = bootstrap
        self.feature_subsample = feature_subsample
        self.trees_ = None

    def _fit(self, x, y):
        n, d = x.shape
        n_sample = max(1, int(round(math.sqrt(d)))) if self.feature_subsample else None
        self.trees_ = []
        for t in range(self.tree_count):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=self.seed, spawn_key=(t,)))
            if self.bootstrap:
                idx = rng.integers(0, n, size=n)
                xt, yt = x[idx], y[idx]
            else:
                xt, yt = x, y
            split_rng = rng if n_sample is not None else None
            self.trees_.append(_grow(xt, yt, len(self.classes_), 0,
                                     self.max_depth, self.min_split,
                                     split_rng, n_sample))

    def _predict_row(self, row) -> int:
        votes = np.zeros(len(self.classes_), dtype=np.int64)
        for tree in self.trees_:
            node = tree
            while "leaf" not in node:
                node = node["lo"] if row[node["feature"]] <= node["threshold"] else node["hi"]
            votes[node["leaf"]] += 1
        return int(np.argmax(votes))


class KNearestNeighbors(Classifier):
    """Euclidean k-NN over min-max scaled features (scaling fit on train only)."""

    kind = "knn"

    def __init__(self, k: int = 1):
        super().__init__()
        if k < 1:
            raise BadConfig("k must be >= 1")
        self.k = k
        self.x_ = None
        self.y_ = None
        self.lo_ = None
        self.span_ = None

    def _scale(self, rows: np.ndarray) -> np.ndarray:
        return (rows - self.lo_) / self.span_

    def _fit(self, x, y):
        if self.k > x.shape[0]:
            raise DegenerateTrainingSet(
                f"k={self.k} exceeds training set size {x.shape[0]}")
        self.lo_ = x.min(axis=0)
        span = x.max(axis=0) - self.lo_
        span[span == 0] = 1.0  # constant feature scales to 0
        self.span_ = span
        self.x_ = self._scale(x)
        self.y_ = y

    def _predict_row(self, row) -> int:
        d = np.linalg.norm(self.x_ - self._scale(row), axis=1)
        nearest = np.argsort(d, kind="stable")[: self.k]
        votes = np.bincount(self.y_[nearest], minlength=len(self.classes_))
        return int(np.argmax(votes))


def make_classifier(kind: str, **hyperparams) -> Classifier:
    if kind == "naive_bayes":
        return NaiveBayes(**hyperparams)
    if kind == "decision_tree":
        return DecisionTree(**hyperparams)
    if kind == "random_forest":
        return RandomForest(**hyperparams)
    if kind == "knn":
        return KNearestNeighbors(**hyperparams)
    if kind == "svm":
        raise BadConfig("svm is a plug-in slot; no implementation ships")
    raise BadConfig(f"unknown classifier kind {kind!r}")


def _hyperparams(clf: Classifier) -> dict:
    keys = {
        "naive_bayes": ("variance_floor",),
        "decision_tree": ("max_depth", "min_split"),
        "random_forest": ("tree_count", "max_depth", "min_split", "seed",
                          "bootstrap", "feature_subsample"),
        "knn": ("k",),
    }[clf.kind]
    return {k: getattr(clf, k) for k in keys}


def save_classifier(clf: Classifier, path) -> None:
    if clf.classes_ is None:
        raise NotFitted("cannot save an unfitted classifier")
    state = {
        "naive_bayes": lambda c: {"means": c.means_.tolist(),
                                  "variances": c.variances_.tolist(),
                                  "log_priors": c.log_priors_.tolist()},
        "decision_tree": lambda c: {"root": c.root_},
        "random_forest": lambda c: {"trees": c.trees_},
        "knn": lambda c: {"x": c.x_.tolist(), "y": c.y_.tolist(),
                          "lo": c.lo_.tolist(), "span": c.span_.tolist()},
    }[clf.kind](clf)
    doc = {
        "version": CLASSIFIER_VERSION,
        "kind": clf.kind,
        "classes": clf.classes_,
        "dim": clf.dim_,
        "hyperparams": _hyperparams(clf),
        "state": state,
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write classifier file {path}: {exc}") from exc


def load_classifier(path) -> Classifier:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read classifier file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"classifier file {path} is not valid JSON: {exc}") from exc
    if doc.get("version") != CLASSIFIER_VERSION:
        raise CorruptModel(f"unsupported classifier version {doc.get('version')!r}")
    try:
        clf = make_classifier(doc["kind"], **doc["hyperparams"])
        clf.classes_ = list(doc["classes"])
        clf.dim_ = int(doc["dim"])
        state = doc["state"]
        if clf.kind == "naive_bayes":
            clf.means_ = np.asarray(state["means"])
            clf.variances_ = np.asarray(state["variances"])
            clf.log_priors_ = np.asarray(state["log_priors"])
        elif clf.kind == "decision_tree":
            clf.root_ = state["root"]
        elif clf.kind == "random_forest":
            clf.trees_ = state["trees"]
        else:
            clf.x_ = np.asarray(state["x"])
            clf.y_ = np.asarray(state["y"], dtype=np.int64)
            clf.lo_ = np.asarray(state["lo"])
            clf.span_ = np.asarray(state["span"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"malformed classifier file: {exc}") from exc
    return clf
