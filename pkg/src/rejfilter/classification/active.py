"""Active binary classification with a particle cloud of training vectors.

Each query reads one feature of the test vector: the feature whose value
varies most across the cloud. Particles are accepted with a Gaussian
likelihood in the residual, the class posterior is read off the accepted
particles, and the cloud is rebuilt bootstrap-style within each class.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import CorpusIntegrityError, DegenerateCloudError
from ..inference import LikelihoodModel, rejection_step
from .corpus import Corpus

DEFAULT_CAPACITY = 1000
DEFAULT_RECOVERY = 0.02
REPLICATED_SHARE = 0.95
SIGMA_FLOOR = 1e-3
# Safety net for the widen-and-retry loop; 1.02**5000 is far past any finite residual.
_MAX_WIDENINGS = 5000


def pixel_likelihood(observed, x, i: int, sigma: float):
    """``exp(-(x_i - E)^2 / 2 sigma^2)``; ``x`` may be one vector or a stack of rows."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    x = np.asarray(x, dtype=float)
    xi = x[..., i]
    return np.exp(-((xi - observed) ** 2) / (2.0 * sigma * sigma))


class PixelLikelihood(LikelihoodModel):
    """Likelihood of observing intensity ``E`` at feature ``i``; already <= 1."""

    def __init__(self, feature: int, sigma: float):
        if not sigma > 0:
            raise ValueError("sigma must be > 0")
        self.feature = int(feature)
        self.sigma = float(sigma)

    def likelihood(self, evidence, xs):
        return pixel_likelihood(evidence, xs, self.feature, self.sigma)


@dataclass(frozen=True, eq=False)
class ParticleCloud:
    """Particles are row indices into ``corpus``; labels come from the corpus."""

    corpus: Corpus
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    @property
    def capacity(self) -> int:
        return len(self.indices)

    @property
    def vectors(self) -> np.ndarray:
        return self.corpus.vectors[self.indices]

    @property
    def labels(self) -> np.ndarray:
        return self.corpus.labels[self.indices]

    def class_fractions(self) -> np.ndarray:
        if len(self.indices) == 0:
            return np.array([np.nan, np.nan])
        p1 = float(self.labels.mean())
        return np.array([1.0 - p1, p1])


def _largest_remainder(total: int, weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    quotas = total * w / w.sum()
    counts = np.floor(quotas).astype(np.int64)
    short = total - counts.sum()
    if short:
        # ties go to the lower class index
        order = np.argsort(-(quotas - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def _draw_from_class(corpus: Corpus, c: int, n: int, rng) -> np.ndarray:
    pool = corpus.class_indices(c)
    if n and len(pool) == 0:
        raise CorpusIntegrityError(f"class {c} needs {n} particles but the corpus has none")
    return rng.choice(pool, size=n, replace=n > len(pool))


def initial_cloud(corpus: Corpus, capacity: int, rng) -> ParticleCloud:
    """``capacity`` particles split across classes in corpus proportion."""
    counts = _largest_remainder(capacity, corpus.class_fractions())
    parts = [_draw_from_class(corpus, c, counts[c], rng) for c in (0, 1)]
    return ParticleCloud(corpus, np.concatenate(parts))


def select_query(cloud: ParticleCloud):
    """Feature of largest variance across the cloud and its likelihood width.

    Ties go to the lowest feature index. The width is the feature's standard
    deviation across the cloud, floored at 1e-3 of its range over the corpus.
    """
    if len(cloud) == 0:
        raise ValueError("cloud is empty")
    var = cloud.vectors.var(axis=0)
    i = int(np.argmax(var))
    if not var[i] > 0:
        raise DegenerateCloudError("no feature varies across the particle cloud")
    sigma = max(math.sqrt(var[i]), SIGMA_FLOOR * float(cloud.corpus.feature_range[i]))
    return i, sigma


class ClassifyUpdate(NamedTuple):
    accepted: ParticleCloud
    posterior: np.ndarray
    sigma: float


def rf_classify_update(cloud: ParticleCloud, observed: float, i: int, sigma: float, rng,
                       recovery: float = DEFAULT_RECOVERY) -> ClassifyUpdate:
    """Accept each particle with probability ``pixel_likelihood``.

    If nothing survives, the same observation is retried with ``sigma``
    widened by ``1 + recovery`` until something does. The class posterior
    is the class frequency among accepted particles.
    """
    vectors = cloud.vectors
    for _ in range(_MAX_WIDENINGS):
        mask, _ = rejection_step(vectors, [observed], PixelLikelihood(i, sigma), rng)
        if mask.any():
            break
        sigma *= 1.0 + recovery
    else:
        mask = np.ones(len(cloud), dtype=bool)
    accepted = ParticleCloud(cloud.corpus, cloud.indices[mask])
    return ClassifyUpdate(accepted, accepted.class_fractions(), sigma)


def resample_cloud(accepted: ParticleCloud, corpus: Corpus, capacity: int, rng) -> ParticleCloud:
    """Rebuild a cloud of ``capacity`` particles from the survivors.

    Class sizes follow the survivors' class frequencies (largest-remainder
    rounding). Within a class, 95% of the slots are copies of that class's
    survivors, dealt round-robin over a shuffled order, and the rest are
    fresh uniform draws from the corpus vectors of the class. With no
    survivors, the corpus class proportions are used and every particle is
    drawn fresh.
    """
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    if len(accepted) == 0:
        return initial_cloud(corpus, capacity, rng)
    labels = accepted.labels
    counts = _largest_remainder(capacity, [np.sum(labels == 0), np.sum(labels == 1)])
    parts = []
    for c in (0, 1):
        n_c = int(counts[c])
        if n_c == 0:
            continue
        n_fresh = int(math.floor((1.0 - REPLICATED_SHARE) * n_c + 0.5))
        survivors = accepted.indices[labels == c]
        copies = np.resize(rng.permutation(survivors), n_c - n_fresh)
        parts.append(copies)
        parts.append(_draw_from_class(corpus, c, n_fresh, rng))
    return ParticleCloud(corpus, np.concatenate(parts))


@dataclass
class ClassifySession:
    """Settings and bookkeeping shared by the restarts of one classification."""

    stop: float = 0.01
    restarts: int = 3
    budget: int = 784
    capacity: int = DEFAULT_CAPACITY
    recovery: float = DEFAULT_RECOVERY
    query_log: list = field(default_factory=list)
    histogram: np.ndarray = None

    def __post_init__(self):
        if not 0 < self.stop < 0.5:
            raise ValueError("stop threshold must lie in (0, 0.5)")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.budget < self.restarts:
            raise ValueError("budget must be at least the number of restarts")

    @property
    def per_restart(self) -> int:
        return self.budget // self.restarts

    @property
    def queries(self) -> int:
        return len(self.query_log)


class ClassifyResult(NamedTuple):
    label: int
    queries: int
    histogram: np.ndarray
    votes: tuple


def _majority(labels) -> int:
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=2)
    return int(np.argmax(counts))


def _run_restart(read, corpus: Corpus, session: ClassifySession, rng) -> int:
    cloud = initial_cloud(corpus, session.capacity, rng)
    for _ in range(session.per_restart):
        try:
            i, sigma = select_query(cloud)
        except DegenerateCloudError:
            break
        observed = float(read(i))
        session.query_log.append((i, observed))
        session.histogram[i] += 1
        update = rf_classify_update(cloud, observed, i, sigma, rng, session.recovery)
        if update.posterior.min() <= session.stop:
            return int(np.argmax(update.posterior))
        cloud = resample_cloud(update.accepted, corpus, session.capacity, rng)
    return _majority(cloud.labels)


def classify(test_vector, corpus: Corpus, stop: float = 0.01, restarts: int = 3,
             budget: int = 784, capacity: int = DEFAULT_CAPACITY, rng=None,
             recovery: float = DEFAULT_RECOVERY) -> ClassifyResult:
    """Label one test vector by majority vote over independent restarts.

    ``test_vector`` is anything indexable by feature number, or a callable
    taking the feature number; each read counts against the budget. Each
    restart gets ``budget // restarts`` reads and stops early once the
    smaller class posterior falls to ``stop`` or below.
    """
    rng = np.random.default_rng(rng)
    read = test_vector if callable(test_vector) else test_vector.__getitem__
    session = ClassifySession(stop, restarts, budget, capacity, recovery)
    session.histogram = np.zeros(corpus.n_features, dtype=np.int64)
    votes = tuple(_run_restart(read, corpus, session, rng) for _ in range(restarts))
    return ClassifyResult(_majority(votes), session.queries, session.histogram, votes)


def feature_select(histogram, percentile: float) -> np.ndarray:
    """Indices of features whose query count reaches the given percentile.

    The percentile is taken over all features, queried or not. Features
    never queried are kept only at percentile 0, where nothing is culled.
    """
    if not 0 <= percentile < 100:
        raise ValueError("percentile must lie in [0, 100)")
    hist = np.asarray(histogram)
    if percentile == 0:
        return np.arange(hist.size)
    threshold = np.percentile(hist, percentile)
    return np.flatnonzero((hist >= threshold) & (hist > 0))


PERCENTILE_TABLE = (0, 35, 36, 50, 75, 80, 90, 95, 97.5)


def percentile_table(histogram, percentiles=PERCENTILE_TABLE):
    """``[(percentile, retained feature count), ...]``."""
    return [(p, int(feature_select(histogram, p).size)) for p in percentiles]
