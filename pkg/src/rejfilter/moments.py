"""Streaming first/second moment accumulation for accepted samples.

Two paths are kept side by side. The Welford running mean and centred
sum of products is what :func:`finalize` uses. The raw sums ``M = sum x``
and ``S = sum x x^T`` are what a batched node ships to the coordinator;
they are held in ``np.longdouble`` because the textbook formula
``(S - n mu mu^T) / (n - 1)`` loses about half its bits to cancellation.
"""

import numpy as np

from .errors import DimensionMismatchError
from .gaussian import GaussianModel

WIDE = np.longdouble


class MomentAccumulator:
    """Constant-memory accumulator of count, mean and scatter.

    Parameters
    ----------
    dim : int
        Dimension of the hypotheses that will be pushed.
    """

    __slots__ = ("dim", "count", "mean", "m2", "sum", "sum_outer")

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = int(dim)
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros((dim, dim))
        self.sum = np.zeros(dim, dtype=WIDE)
        self.sum_outer = np.zeros((dim, dim), dtype=WIDE)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise DimensionMismatchError(
                f"sample dimension {x.shape[-1:]} does not match accumulator dimension {self.dim}"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite sample rejected")
        return x

    def push(self, x) -> "MomentAccumulator":
        """Add one sample (classic Welford step). Returns ``self``."""
        x = self._check(np.atleast_1d(x))
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + np.outer(delta, x - self.mean)
        xw = x.astype(WIDE)
        self.sum += xw
        self.sum_outer += np.outer(xw, xw)
        return self

    def extend(self, xs) -> "MomentAccumulator":
        """Add a block of samples, shape ``(n, dim)``, via a pairwise merge."""
        xs = np.asarray(xs, dtype=float)
        if xs.ndim == 1 and self.dim == 1:
            xs = xs[:, None]
        xs = self._check(xs)
        if xs.ndim != 2:
            raise DimensionMismatchError("extend expects an (n, dim) array")
        n = xs.shape[0]
        if n == 0:
            return self
        block_mean = xs.mean(axis=0)
        centred = xs - block_mean
        block_m2 = centred.T @ centred
        self._combine(n, block_mean, block_m2)
        xw = xs.astype(WIDE)
        self.sum += xw.sum(axis=0)
        self.sum_outer += xw.T @ xw
        return self

    def _combine(self, n_b, mean_b, m2_b):
        n_a = self.count
        n = n_a + n_b
        delta = mean_b - self.mean
        self.mean = self.mean + delta * (n_b / n)
        self.m2 = self.m2 + m2_b + np.outer(delta, delta) * (n_a * n_b / n)
        self.count = n

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Return a new accumulator equivalent to seeing both sample streams."""
        if other.dim != self.dim:
            raise DimensionMismatchError(f"cannot merge dimensions {self.dim} and {other.dim}")
        out = self.copy()
        if other.count:
            out._combine(other.count, other.mean, other.m2)
            out.sum += other.sum
            out.sum_outer += other.sum_outer
        return out

    def copy(self) -> "MomentAccumulator":
        out = MomentAccumulator(self.dim)
        out.count = self.count
        out.mean = self.mean.copy()
        out.m2 = self.m2.copy()
        out.sum = self.sum.copy()
        out.sum_outer = self.sum_outer.copy()
        return out

    def covariance(self) -> np.ndarray:
        """Unbiased sample covariance from the Welford path (needs count >= 2)."""
        if self.count < 2:
            raise ValueError("covariance needs at least two samples")
        c = self.m2 / (self.count - 1)
        return 0.5 * (c + c.T)

    def naive_moments(self):
        """Mean and covariance from the raw sums, ``(S - n mu mu^T)/(n-1)``."""
        if self.count < 2:
            raise ValueError("covariance needs at least two samples")
        n = WIDE(self.count)
        mu = self.sum / n
        c = (self.sum_outer - n * np.outer(mu, mu)) / (n - 1)
        c = 0.5 * (c + c.T)
        return mu.astype(float), c.astype(float)

    @property
    def nbytes(self) -> int:
        """Bytes held by the accumulator state (arrays plus the counter)."""
        arrays = (self.mean, self.m2, self.sum, self.sum_outer)
        return sum(a.nbytes for a in arrays) + np.dtype(np.int64).itemsize

    def __repr__(self):
        return f"MomentAccumulator(dim={self.dim}, count={self.count})"


def accumulate(acc: MomentAccumulator, x) -> MomentAccumulator:
    return acc.push(x)


def merge(a: MomentAccumulator, b: MomentAccumulator) -> MomentAccumulator:
    return a.merge(b)


def finalize(acc: MomentAccumulator, fallback: GaussianModel, r: float = 0.0) -> GaussianModel:
    """Turn accumulated moments into the posterior Gaussian.

    ``count >= 2`` gives the sample mean and unbiased covariance. With no
    accepted samples the fallback model is returned with its covariance
    inflated by ``1 + r``. A single accepted sample pins the mean but says
    nothing about spread, so it is paired with the inflated fallback
    covariance.
    """
    if r < 0:
        raise ValueError("recovery factor must be >= 0")
    if fallback.dim != acc.dim:
        raise DimensionMismatchError(
            f"fallback dimension {fallback.dim} does not match accumulator dimension {acc.dim}"
        )
    if acc.count >= 2:
        return GaussianModel(acc.mean, acc.covariance())
    if acc.count == 1:
        return GaussianModel(acc.mean, (1.0 + r) * fallback.covariance)
    return GaussianModel(fallback.mean, (1.0 + r) * fallback.covariance)
