import os
from pathlib import Path

import numpy as np
import pytest

VERDICTS = []

MNIST_DIRS = [os.environ.get("RF_MNIST_DIR"), Path(__file__).parent.parent / "data" / "mnist5k"]


@pytest.fixture
def rng():
    return np.random.default_rng(20161017)


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(criterion, ok, detail):
        VERDICTS.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        assert ok, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)


def find_mnist():
    """Directory holding train-/t10k- IDX files, or None."""
    names = ("train-images-idx3-ubyte", "train-labels-idx1-ubyte",
             "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")
    for d in MNIST_DIRS:
        if not d:
            continue
        d = Path(d)
        found = []
        for n in names:
            for candidate in (d / n, d / (n + ".gz")):
                if candidate.exists():
                    found.append(candidate)
                    break
        if len(found) == 4:
            return found
    return None


def mnist_zero_one_pool():
    """All zero/one digits from both IDX splits, or None when the files are absent."""
    from rejfilter.classification import load_mnist, task_corpus

    paths = find_mnist()
    if paths is None:
        return None
    tr_x, tr_y = load_mnist(paths[0], paths[1])
    te_x, te_y = load_mnist(paths[2], paths[3])
    return task_corpus(np.vstack([tr_x, te_x]), np.concatenate([tr_y, te_y]), "zero-one")


def shuffled_splits(pool, n_splits, seed, test_share=1 / 11):
    """``n_splits`` random train/test partitions of ``pool`` at a 10:1 ratio."""
    from rejfilter.classification import Corpus

    rng = np.random.default_rng(seed)
    n_test = int(round(test_share * len(pool)))
    for _ in range(n_splits):
        order = rng.permutation(len(pool))
        te, tr = order[:n_test], order[n_test:]
        yield (Corpus(pool.vectors[tr], pool.labels[tr]),
               Corpus(pool.vectors[te], pool.labels[te]))
