import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from discurv.imagecore import add_noise, as_image, as_mask, divergence, gradient_forward, laplacian, laplacian_symbol

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_gradient_of_constant_is_zero():
    assert np.array_equal(gradient_forward(np.full((5, 7), 3.0)), np.zeros((2, 5, 7)))


def test_gradient_small_example():
    # component 0 differences along rows (i), component 1 along columns (j), with wrap
    p = gradient_forward(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert np.array_equal(p[0], [[2, 2], [-2, -2]])
    assert np.array_equal(p[1], [[1, -1], [1, -1]])


def test_gradient_wraps_periodically():
    u = np.arange(12.0).reshape(3, 4)
    p = gradient_forward(u)
    assert p[0, 2, 1] == u[0, 1] - u[2, 1]
    assert p[1, 1, 3] == u[1, 0] - u[1, 3]


@pytest.mark.parametrize("shape", [(8, 8), (16, 16), (5, 9)])
def test_adjoint_identity_random(shape):
    rng = np.random.default_rng(1)
    u = rng.normal(size=shape)
    p = rng.normal(size=(2,) + shape)
    lhs = np.sum(gradient_forward(u) * p)
    rhs = -np.sum(u * divergence(p))
    assert abs(lhs - rhs) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (6, 5), elements=finite), arrays(np.float64, (2, 6, 5), elements=finite))
def test_adjoint_property(u, p):
    lhs = np.sum(gradient_forward(u) * p)
    rhs = -np.sum(u * divergence(p))
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, np.abs(u).sum() * np.abs(p).sum() ** 0.5)


def test_divergence_trivial_cases():
    assert np.array_equal(divergence(np.zeros((2, 4, 4))), np.zeros((4, 4)))
    assert np.array_equal(divergence(gradient_forward(np.full((4, 4), 9.0))), np.zeros((4, 4)))


def test_divergence_rejects_bad_shape():
    with pytest.raises(ValueError):
        divergence(np.zeros((3, 4, 4)))


def test_laplacian_matches_div_grad():
    u = np.random.default_rng(2).normal(size=(9, 11))
    assert np.allclose(laplacian(u), divergence(gradient_forward(u)), atol=1e-12)


def test_laplacian_symbol_entries():
    s = laplacian_symbol(8, 6)
    assert s.shape == (6, 8)
    assert s[0, 0] == 0.0
    assert s[3, 4] == pytest.approx(-8.0, abs=1e-14)
    assert np.all(s <= 1e-15)


def test_laplacian_symbol_is_the_dft_eigenvalue():
    H, W = 6, 10
    u = np.random.default_rng(3).normal(size=(H, W))
    via_fft = np.real(np.fft.ifft2(np.fft.fft2(u) * laplacian_symbol(W, H)))
    assert np.allclose(via_fft, laplacian(u), atol=1e-12)


def test_gaussian_zero_sigma_is_identity():
    u = np.random.default_rng(0).uniform(0, 255, (10, 10))
    assert np.array_equal(add_noise(u, "gaussian", sigma=0.0, seed=3), u)


def test_gaussian_sample_std():
    u = np.full((256, 256), 128.0)
    noisy = add_noise(u, "gaussian", sigma=20.0, seed=11)
    assert 19.0 <= np.std(noisy - u) <= 21.0


def test_gaussian_clip_stays_in_range():
    noisy = add_noise(np.full((64, 64), 250.0), "gaussian", sigma=30, seed=0, clip=True)
    assert noisy.min() >= 0 and noisy.max() <= 255


def test_salt_pepper_exact_count():
    u = np.full((100, 100), 128.0)
    noisy = add_noise(u, "salt_pepper", fraction=0.3, seed=5)
    assert np.count_nonzero(noisy != u) == 3000
    assert np.count_nonzero(noisy == 0) == 1500
    assert np.count_nonzero(noisy == 255) == 1500


def test_poisson_mean_and_integrality():
    u = np.full((200, 200), 40.0)
    noisy = add_noise(u, "poisson", seed=9)
    assert np.array_equal(noisy, np.round(noisy))
    assert abs(noisy.mean() - 40.0) < 0.2


@pytest.mark.parametrize("model,kw", [("gaussian", {"sigma": 15}), ("salt_pepper", {"fraction": 0.2}), ("poisson", {})])
def test_noise_is_deterministic_per_seed(model, kw):
    u = np.random.default_rng(0).uniform(0, 255, (32, 32))
    a = add_noise(u, model, seed=42, **kw)
    b = add_noise(u, model, seed=42, **kw)
    c = add_noise(u, model, seed=43, **kw)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_noise_errors():
    u = np.ones((4, 4))
    with pytest.raises(ValueError):
        add_noise(u, "speckle", seed=0)
    with pytest.raises(ValueError):
        add_noise(u, "salt_pepper", fraction=1.5, seed=0)
    with pytest.raises(ValueError):
        add_noise(-u, "poisson", seed=0)
    with pytest.raises(ValueError):
        add_noise(u, "gaussian", sigma=-1, seed=0)


def test_validation_helpers():
    with pytest.raises(ValueError):
        as_image(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        as_image(np.zeros((2, 2, 4)))
    assert as_image(np.zeros((3, 3, 1))).shape == (3, 3)
    with pytest.raises(ValueError):
        as_mask(np.zeros((3, 3), bool))
    with pytest.raises(ValueError):
        as_mask(np.ones((3, 3), bool), shape=(4, 4))
