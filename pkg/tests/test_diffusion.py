import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rejfilter.diffusion import DiffusionKernel, diffuse
from rejfilter.gaussian import GaussianModel

MODEL = GaussianModel([0.2, -0.4], [[0.5, 0.1], [0.1, 0.25]])


def test_zero_dt_is_identity():
    assert diffuse(MODEL, DiffusionKernel(0.3), 0.0) == MODEL


def test_scalar_variance_grows_linearly():
    out = diffuse(GaussianModel(1.0, 0.04), DiffusionKernel(0.01), 3.0)
    assert out.mean[0] == 1.0
    assert out.covariance[0, 0] == pytest.approx(0.04 + 0.01 * 3.0, rel=1e-15)


def test_walk_variance_from_zero():
    eta = (math.pi / 120) ** 2
    out = diffuse(GaussianModel(0.0, 0.0), DiffusionKernel(eta), 1.0)
    assert out.covariance[0, 0] == eta
    assert out.covariance[0, 0] == pytest.approx(6.854e-4, rel=1e-3)


def test_matrix_rate():
    rate = np.array([[0.2, 0.05], [0.05, 0.1]])
    out = diffuse(MODEL, DiffusionKernel(rate), 2.0)
    np.testing.assert_allclose(out.covariance, MODEL.covariance + 2.0 * rate)


def test_rejections():
    with pytest.raises(ValueError):
        diffuse(MODEL, DiffusionKernel(0.1), -1.0)
    with pytest.raises(ValueError):
        DiffusionKernel(-0.1)
    with pytest.raises(ValueError):
        DiffusionKernel([[1.0, 0.0], [0.5, 1.0]])
    with pytest.raises(ValueError):
        DiffusionKernel([[1.0, 2.0], [2.0, 1.0]])


dyadic = st.integers(0, 1 << 20).map(lambda n: n / (1 << 10))


@settings(max_examples=100, deadline=None)
@given(dyadic, dyadic, dyadic)
def test_semigroup_exact(rate, a, b):
    # dyadic rationals keep every sum exact, so equality is bitwise
    k = DiffusionKernel(rate)
    assert diffuse(diffuse(MODEL, k, a), k, b) == diffuse(MODEL, k, a + b)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 10), st.floats(0, 10), st.floats(0, 10))
def test_semigroup_to_rounding(rate, a, b):
    k = DiffusionKernel(rate)
    two = diffuse(diffuse(MODEL, k, a), k, b)
    one = diffuse(MODEL, k, a + b)
    np.testing.assert_allclose(two.covariance, one.covariance, rtol=4e-16, atol=0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 10), st.floats(0, 10))
def test_mean_fixed_and_spread_grows(rate, dt):
    out = diffuse(MODEL, DiffusionKernel(rate), dt)
    np.testing.assert_array_equal(out.mean, MODEL.mean)
    assert out.trace >= MODEL.trace
