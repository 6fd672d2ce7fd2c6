"""Prediction step for drifting parameters.

Convolving a Gaussian belief with a zero-mean Gaussian kernel keeps it
Gaussian: the mean is untouched and the kernel variance, growing linearly
with elapsed time, is added to the covariance.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .gaussian import GaussianModel


@dataclass(frozen=True, eq=False)
class DiffusionKernel:
    """Variance added per unit time.

    ``rate`` is either a scalar (isotropic, ``rate * I``) or a symmetric PSD
    ``D x D`` matrix.
    """

    rate: object = 0.0

    def __post_init__(self):
        rate = np.asarray(self.rate, dtype=float)
        if rate.ndim == 0:
            if not rate >= 0:
                raise ValueError("diffusion rate must be >= 0")
        elif rate.ndim == 2 and rate.shape[0] == rate.shape[1]:
            if not np.allclose(rate, rate.T, rtol=0, atol=1e-12 * max(1.0, np.abs(rate).max())):
                raise ValueError("diffusion rate matrix must be symmetric")
            if np.linalg.eigvalsh(rate)[0] < -1e-10 * max(np.trace(rate), 0.0):
                raise ValueError("diffusion rate matrix must be positive semidefinite")
        else:
            raise ValueError("diffusion rate must be a scalar or a square matrix")
        object.__setattr__(self, "rate", rate)

    def increment(self, dim: int, dt: float) -> np.ndarray:
        if self.rate.ndim == 0:
            return float(self.rate) * dt * np.eye(dim)
        if self.rate.shape != (dim, dim):
            raise DimensionMismatchError(
                f"rate matrix shape {self.rate.shape} does not match model dimension {dim}"
            )
        return self.rate * dt


def diffuse(model: GaussianModel, kernel: DiffusionKernel, dt: float = 1.0) -> GaussianModel:
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0:
        return model
    return GaussianModel(model.mean, model.covariance + kernel.increment(model.dim, dt))
