"""Labelled training corpora for binary classification."""

from dataclasses import dataclass

import numpy as np

from ..errors import CorpusIntegrityError

TASKS = ("zero-one", "even-odd")


@dataclass(frozen=True, eq=False)
class Corpus:
    vectors: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if vectors.ndim != 2 or labels.shape != (len(vectors),):
            raise CorpusIntegrityError("vectors must be (n, features) with one label per row")
        if len(vectors) == 0:
            raise CorpusIntegrityError("corpus is empty")
        if not np.isin(labels, (0, 1)).all():
            raise CorpusIntegrityError("labels must be 0 or 1")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_by_class", tuple(np.flatnonzero(labels == c) for c in (0, 1)))
        object.__setattr__(self, "feature_range", vectors.max(axis=0) - vectors.min(axis=0))

    def __len__(self):
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.vectors.shape[1]

    def class_indices(self, c: int) -> np.ndarray:
        return self._by_class[c]

    def class_fractions(self) -> np.ndarray:
        return np.array([len(self._by_class[0]), len(self._by_class[1])]) / len(self)

    def restrict(self, features) -> "Corpus":
        """Keep only the given feature columns."""
        return Corpus(self.vectors[:, np.asarray(features, dtype=int)], self.labels)


def task_labels(digits, task: str) -> np.ndarray:
    """Binary labels for an MNIST task; rows not in the task get -1.

    ``zero-one`` keeps digits 0 and 1 (label = digit); ``even-odd``
    keeps every digit with label 1 for odd.
    """
    digits = np.asarray(digits, dtype=np.int64)
    if task == "zero-one":
        return np.where(digits <= 1, digits, -1)
    if task == "even-odd":
        return digits % 2
    raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")


def task_corpus(images, digits, task: str) -> Corpus:
    labels = task_labels(digits, task)
    keep = labels >= 0
    return Corpus(np.asarray(images)[keep], labels[keep])


def make_blobs(n_per_class: int, n_features: int = 8, separation: float = 10.0,
               sigma: float = 1.0, rng=None) -> Corpus:
    """Two isotropic Gaussian classes whose means are ``separation * sigma``
    apart in Euclidean distance, the offset spread evenly over features."""
    rng = np.random.default_rng(rng)
    offset = separation * sigma / np.sqrt(n_features)
    x0 = rng.normal(0.0, sigma, (n_per_class, n_features))
    x1 = rng.normal(offset, sigma, (n_per_class, n_features))
    labels = np.repeat([0, 1], n_per_class)
    order = rng.permutation(2 * n_per_class)
    return Corpus(np.vstack([x0, x1])[order], labels[order])
