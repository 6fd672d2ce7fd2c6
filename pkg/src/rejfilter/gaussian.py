"""Gaussian belief state and sampling from it."""

from dataclasses import dataclass

import numpy as np

from .errors import CorruptModelError, DimensionMismatchError

SYMMETRY_RTOL = 1e-12
PSD_RTOL = 1e-10

_JITTER_START = 1e-12
_JITTER_STOP = 1e-6


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """Mean vector and covariance matrix; the whole stored belief.

    Scalars and 1-D covariances are promoted, so ``GaussianModel(0.5, 0.1)``
    is a valid one-dimensional model with variance 0.1.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float)).copy()
        cov = np.asarray(self.covariance, dtype=float)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        elif cov.ndim == 1:
            cov = np.diag(cov)
        cov = cov.copy()
        if mean.ndim != 1:
            raise DimensionMismatchError(f"mean must be a vector, got shape {mean.shape}")
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise DimensionMismatchError(
                f"covariance shape {cov.shape} does not match mean dimension {d}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise CorruptModelError("model contains non-finite entries")
        asym = np.abs(cov - cov.T)
        if np.any(asym > SYMMETRY_RTOL * np.maximum(1.0, np.abs(cov))):
            raise CorruptModelError("covariance is not symmetric")
        trace = float(np.trace(cov))
        if d > 0:
            lo = float(np.linalg.eigvalsh(cov)[0])
            if lo < -PSD_RTOL * max(trace, 0.0) or trace < 0:
                raise CorruptModelError(
                    f"covariance is not positive semidefinite (min eigenvalue {lo:g})"
                )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.covariance))

    def scaled(self, factor: float) -> "GaussianModel":
        """Same mean, covariance multiplied by ``factor``."""
        return GaussianModel(self.mean, factor * self.covariance)

    def __eq__(self, other):
        if not isinstance(other, GaussianModel):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(
            self.covariance, other.covariance
        )

    def __repr__(self):
        return f"GaussianModel(mean={self.mean.tolist()}, covariance={self.covariance.tolist()})"


def covariance_factor(cov) -> np.ndarray:
    """Return ``A`` with ``A @ A.T ~= cov``.

    Cholesky is attempted first; on failure a diagonal jitter starting at
    1e-12 * trace is added and grown tenfold up to 1e-6 * trace.
    """
    cov = np.asarray(cov, dtype=float)
    trace = float(np.trace(cov))
    if trace == 0.0 and not np.any(cov):
        return np.zeros_like(cov)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    eye = np.eye(cov.shape[0])
    jitter = _JITTER_START
    while jitter <= _JITTER_STOP * (1 + 1e-9):
        try:
            return np.linalg.cholesky(cov + jitter * trace * eye)
        except np.linalg.LinAlgError:
            jitter *= 10
    raise CorruptModelError("covariance could not be factorized even with jitter")


def sample_prior(model: GaussianModel, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw ``mean + A z`` with ``z`` standard normal.

    With ``size=None`` a single vector of shape ``(D,)`` is returned,
    otherwise an array of shape ``(size, D)``.
    """
    factor = covariance_factor(model.covariance)
    if size is None:
        z = rng.standard_normal(model.dim)
        return model.mean + factor @ z
    z = rng.standard_normal((size, model.dim))
    return model.mean + z @ factor.T
