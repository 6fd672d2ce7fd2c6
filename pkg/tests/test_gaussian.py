import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rejfilter.errors import CorruptModelError, DimensionMismatchError
from rejfilter.gaussian import GaussianModel, covariance_factor, sample_prior


def test_scalar_promotion():
    m = GaussianModel(0.5, 0.1)
    assert m.dim == 1
    assert m.covariance.shape == (1, 1)
    assert m.covariance[0, 0] == 0.1


def test_rejects_bad_models():
    with pytest.raises(CorruptModelError):
        GaussianModel([0, 0], [[1, 0.5], [0.4, 1]])
    with pytest.raises(CorruptModelError):
        GaussianModel([0, 0], [[1, 2], [2, 1]])
    with pytest.raises(DimensionMismatchError):
        GaussianModel([0, 0, 0], np.eye(2))
    with pytest.raises(CorruptModelError):
        GaussianModel([np.nan], [[1.0]])


def test_model_is_immutable():
    m = GaussianModel([1.0, 2.0], np.eye(2))
    with pytest.raises(ValueError):
        m.mean[0] = 3.0


def test_zero_covariance_returns_mean(rng):
    m = GaussianModel([1.0, 2.0], np.zeros((2, 2)))
    for _ in range(5):
        np.testing.assert_array_equal(sample_prior(m, rng), [1.0, 2.0])
    np.testing.assert_array_equal(sample_prior(m, rng, size=3), [[1.0, 2.0]] * 3)


def test_standard_normal_mean(rng):
    xs = sample_prior(GaussianModel(np.zeros(2), np.eye(2)), rng, size=100_000)
    assert np.all(np.abs(xs.mean(axis=0)) <= 4 / np.sqrt(100_000))


def test_scaled_variance(rng):
    xs = sample_prior(GaussianModel(5.0, 4.0), rng, size=100_000)
    assert 3.8 <= xs[:, 0].var(ddof=1) <= 4.2


def test_singular_psd_needs_jitter(rng):
    cov = np.array([[1.0, 1.0], [1.0, 1.0]])
    a = covariance_factor(cov)
    np.testing.assert_allclose(a @ a.T, cov, atol=1e-5)
    xs = sample_prior(GaussianModel([0, 0], cov), rng, size=1000)
    np.testing.assert_allclose(xs[:, 0], xs[:, 1], atol=1e-4)


def test_factorization_failure_is_reported():
    # passes the model's own PSD tolerance (-1e-10 * trace) only if built by hand
    cov = np.array([[1.0, 0.0], [0.0, -1e-3]])
    with pytest.raises(CorruptModelError):
        covariance_factor(cov)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-3, 3)))
def test_factor_reproduces_covariance(a):
    cov = a @ a.T
    f = covariance_factor(cov)
    scale = max(1.0, np.trace(cov))
    np.testing.assert_allclose(f @ f.T, cov, atol=1e-5 * scale)
