"""Plain k-nearest-neighbour baseline (Euclidean, brute force)."""

import numpy as np

from .corpus import Corpus


def knn_classify(test_vector, corpus: Corpus, k: int = 5) -> int:
    """Majority label among the ``k`` nearest training vectors.

    Distance ties are broken by corpus order and vote ties toward label 0.
    """
    return int(knn_predict(np.asarray(test_vector, dtype=float)[None, :], corpus, k)[0])


def knn_predict(tests, corpus: Corpus, k: int = 5, chunk: int = 256) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be >= 1")
    tests = np.asarray(tests, dtype=float)
    k = min(k, len(corpus))
    train = corpus.vectors
    train_sq = np.einsum("ij,ij->i", train, train)
    out = np.empty(len(tests), dtype=np.int64)
    for start in range(0, len(tests), chunk):
        block = tests[start : start + chunk]
        d2 = train_sq[None, :] - 2.0 * block @ train.T + np.einsum("ij,ij->i", block, block)[:, None]
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        votes = corpus.labels[nearest].sum(axis=1)
        # label 1 only on a strict majority
        out[start : start + chunk] = (2 * votes > k).astype(np.int64)
    return out
