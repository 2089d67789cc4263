"""Spectral graph features, the KNN black box, and the call-counting oracle.

The classifier side of the toolkit: graphs are embedded as the k smallest
positive eigenvalues of their normalized Laplacian and classified by a
deterministic KNN vote. Every search talks to the classifier only through an
Oracle, which counts each prediction.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .data import GraphDataset
from .graph import Graph, adjacency_matrix

POSITIVE_EIGENVALUE_TOL = 1e-8

DEFAULT_NEIGHBOR_GRID = (1, 3, 5, 7)
DEFAULT_EIG_GRID = (5, 10, 15, 20)

KNN_METRICS = ("euclidean", "manhattan")

MODEL_FORMAT = "densecf-sf-knn"
MODEL_VERSION = 1


class UntrainedModelError(ValueError):
    """Prediction requested from a model with no training data."""


class DegenerateLabelsError(ValueError):
    """Training data contains only one class."""


def normalized_laplacian(g: Graph) -> np.ndarray:
    """I - D^(-1/2) A D^(-1/2); zero-degree rows keep only the identity part,
    so every isolated node contributes an eigenvalue of exactly 1."""
    a = adjacency_matrix(g)
    deg = a.sum(axis=1)
    with np.errstate(divide="ignore"):
        inv_sqrt = 1.0 / np.sqrt(deg)
    inv_sqrt[~np.isfinite(inv_sqrt)] = 0.0
    return np.eye(g.node_count) - (inv_sqrt[:, None] * a) * inv_sqrt[None, :]


def positive_laplacian_eigenvalues(g: Graph) -> np.ndarray:
    """Ascending eigenvalues of the normalized Laplacian above the positivity
    tolerance."""
    eigs = np.linalg.eigvalsh(normalized_laplacian(g))
    return eigs[eigs > POSITIVE_EIGENVALUE_TOL]


@dataclass(frozen=True)
class SpectralFeatures:
    """k smallest positive normalized-Laplacian eigenvalues, ascending.

    When the graph has fewer positive eigenvalues than k, the vector is padded
    at the end with zeros and ``padded`` is set.
    """

    values: tuple[float, ...]
    padded: bool = False


def spectral_features(g: Graph, k: int) -> SpectralFeatures:
    if k <= 0:
        raise ValueError(f"k must be a positive integer, got {k}")
    positives = positive_laplacian_eigenvalues(g)
    values = [float(x) for x in positives[:k]]
    padded = len(values) < k
    values.extend(0.0 for _ in range(k - len(values)))
    return SpectralFeatures(values=tuple(values), padded=padded)


def _features_from_eigenvalues(positives: np.ndarray, k: int) -> tuple[float, ...]:
    values = [float(x) for x in positives[:k]]
    values.extend(0.0 for _ in range(k - len(values)))
    return tuple(values)


@dataclass(frozen=True)
class SFKnnModel:
    """KNN classifier over spectral-feature vectors.

    Prediction is fully deterministic: neighbors at equal distance are taken
    in training-index order and a tied vote resolves to class 0.
    """

    training_features: tuple[tuple[float, ...], ...]
    training_labels: tuple[int, ...]
    n_neighbors: int
    n_eigs: int
    metric: str = "euclidean"
    seed: int | None = None

    def __post_init__(self) -> None:
        if len(self.training_features) != len(self.training_labels):
            raise ValueError("features and labels must have the same length")
        if any(label not in (0, 1) for label in self.training_labels):
            raise ValueError("labels must be 0 or 1")
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be positive")
        if self.training_features and self.n_neighbors > len(self.training_features):
            raise ValueError("n_neighbors exceeds training-set size")
        if self.n_eigs < 1:
            raise ValueError("n_eigs must be positive")
        if self.metric not in KNN_METRICS:
            raise ValueError(f"metric must be one of {KNN_METRICS}")
        if any(len(f) != self.n_eigs for f in self.training_features):
            raise ValueError("every feature vector must have length n_eigs")


def _predict_from_features(
    train: np.ndarray,
    labels: Sequence[int],
    query: np.ndarray,
    n_neighbors: int,
    metric: str,
) -> int:
    if metric == "euclidean":
        dists = np.sqrt(((train - query) ** 2).sum(axis=1))
    else:
        dists = np.abs(train - query).sum(axis=1)
    order = np.argsort(dists, kind="stable")  # equal distance -> lower index first
    ones = sum(labels[i] for i in order[:n_neighbors])
    return 1 if 2 * ones > n_neighbors else 0  # tied vote -> 0


def knn_predict(model: SFKnnModel, g: Graph) -> int:
    if not model.training_features:
        raise UntrainedModelError("model has no training data")
    query = np.asarray(spectral_features(g, model.n_eigs).values)
    train = np.asarray(model.training_features)
    return _predict_from_features(
        train, model.training_labels, query, model.n_neighbors, model.metric
    )


class Oracle:
    """Black-box wrapper that counts every prediction it performs.

    Searches must go through :meth:`predict`. Code that needs a class without
    charging the search (result validation, report bookkeeping) calls the
    underlying ``classifier`` directly.
    """

    def __init__(self, classifier: Callable[[Graph], int]) -> None:
        self.classifier = classifier
        self.call_count = 0

    def predict(self, g: Graph) -> int:
        self.call_count += 1
        return int(self.classifier(g))

    def reset(self) -> None:
        self.call_count = 0

    def clone(self) -> "Oracle":
        return Oracle(self.classifier)

    @classmethod
    def from_model(cls, model: SFKnnModel) -> "Oracle":
        return cls(lambda g: knn_predict(model, g))


@dataclass(frozen=True)
class TrainReport:
    """Cross-validation outcome for the selected configuration."""

    accuracy: float
    f1: float
    n_neighbors: int
    n_eigs: int
    fold_accuracies: tuple[float, ...]
    fold_f1s: tuple[float, ...]
    fold_assignment: tuple[int, ...]
    seed: int
    grid_scores: tuple[tuple[int, int, float, float], ...]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1": self.f1,
            "n_neighbors": self.n_neighbors,
            "n_eigs": self.n_eigs,
            "fold_accuracies": list(self.fold_accuracies),
            "fold_f1s": list(self.fold_f1s),
            "fold_assignment": list(self.fold_assignment),
            "seed": self.seed,
            "grid_scores": [list(row) for row in self.grid_scores],
        }


def _binary_f1(true: Sequence[int], pred: Sequence[int]) -> float:
    tp = sum(1 for t, p in zip(true, pred) if t == 1 and p == 1)
    fp = sum(1 for t, p in zip(true, pred) if t == 0 and p == 1)
    fn = sum(1 for t, p in zip(true, pred) if t == 1 and p == 0)
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def train_sf_knn(
    dataset: GraphDataset,
    neighbor_grid: Sequence[int] = DEFAULT_NEIGHBOR_GRID,
    eig_grid: Sequence[int] = DEFAULT_EIG_GRID,
    folds: int = 5,
    seed: int = 0,
    metric: str = "euclidean",
) -> tuple[SFKnnModel, TrainReport]:
    """Grid-search a KNN configuration by seeded k-fold cross-validation.

    The configuration with the best mean CV accuracy wins; ties go to higher
    mean F1, then fewer neighbors, then fewer eigenvalues. The returned model
    is refit on the full dataset.
    """
    n = len(dataset)
    if n < folds:
        raise ValueError(f"dataset has {n} graphs, fewer than {folds} folds")
    labels = list(dataset.labels)
    if len(set(labels)) < 2:
        raise DegenerateLabelsError("training requires both classes to be present")
    if not neighbor_grid or not eig_grid:
        raise ValueError("parameter grid must be nonempty")

    order = list(range(n))
    random.Random(seed).shuffle(order)
    fold_of = [0] * n
    for pos, idx in enumerate(order):
        fold_of[idx] = pos % folds

    eigenvalues = [positive_laplacian_eigenvalues(e.graph) for e in dataset]
    features = {
        k: np.asarray([_features_from_eigenvalues(eigs, k) for eigs in eigenvalues])
        for k in sorted(set(eig_grid))
    }

    candidates = []  # (mean_acc, mean_f1, -nn, -k, fold data)
    grid_scores = []
    for k in eig_grid:
        feats = features[k]
        for nn in neighbor_grid:
            fold_accs, fold_f1s = [], []
            feasible = True
            for fold in range(folds):
                train_idx = [i for i in range(n) if fold_of[i] != fold]
                test_idx = [i for i in range(n) if fold_of[i] == fold]
                if nn > len(train_idx) or not test_idx:
                    feasible = False
                    break
                train_labels = [labels[i] for i in train_idx]
                preds = [
                    _predict_from_features(
                        feats[train_idx], train_labels, feats[i], nn, metric
                    )
                    for i in test_idx
                ]
                true = [labels[i] for i in test_idx]
                fold_accs.append(sum(t == p for t, p in zip(true, preds)) / len(true))
                fold_f1s.append(_binary_f1(true, preds))
            if not feasible:
                continue
            mean_acc = sum(fold_accs) / folds
            mean_f1 = sum(fold_f1s) / folds
            grid_scores.append((nn, k, mean_acc, mean_f1))
            candidates.append((mean_acc, mean_f1, -nn, -k, fold_accs, fold_f1s))
    if not candidates:
        raise ValueError("no feasible grid configuration for this dataset/fold count")

    best = max(candidates, key=lambda c: c[:4])
    mean_acc, mean_f1, neg_nn, neg_k, fold_accs, fold_f1s = best
    nn, k = -neg_nn, -neg_k
    model = SFKnnModel(
        training_features=tuple(tuple(row) for row in features[k]),
        training_labels=tuple(labels),
        n_neighbors=nn,
        n_eigs=k,
        metric=metric,
        seed=seed,
    )
    report = TrainReport(
        accuracy=mean_acc,
        f1=mean_f1,
        n_neighbors=nn,
        n_eigs=k,
        fold_accuracies=tuple(fold_accs),
        fold_f1s=tuple(fold_f1s),
        fold_assignment=tuple(fold_of),
        seed=seed,
        grid_scores=tuple(grid_scores),
    )
    return model, report


def save_model(model: SFKnnModel, path: Path | str) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "n_neighbors": model.n_neighbors,
        "n_eigs": model.n_eigs,
        "metric": model.metric,
        "seed": model.seed,
        "training_labels": list(model.training_labels),
        "training_features": [list(row) for row in model.training_features],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_model(path: Path | str) -> SFKnnModel:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported version {payload.get('version')!r}")
    return SFKnnModel(
        training_features=tuple(tuple(float(x) for x in row) for row in payload["training_features"]),
        training_labels=tuple(int(x) for x in payload["training_labels"]),
        n_neighbors=int(payload["n_neighbors"]),
        n_eigs=int(payload["n_eigs"]),
        metric=payload.get("metric", "euclidean"),
        seed=payload.get("seed"),
    )
