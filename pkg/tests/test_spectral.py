import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imexflow.flow.spectral import SpectralGrid


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), shape=st.sampled_from([(8, 8), (16, 12), (8, 6, 10), (12, 12, 12)]))
def test_round_trip_and_hermitian(seed, shape):
    g = SpectralGrid(shape)
    u = np.random.default_rng(seed).standard_normal(shape)
    # remove the Nyquist content, which the grid keeps at zero by design
    u = g.backward(g.forward(u))
    uh = g.forward(u)
    assert np.max(np.abs(g.backward(uh) - u)) <= 1e-12 * np.max(np.abs(u))
    assert g.hermitian_defect(uh) <= 1e-13


def test_padding_is_exact_for_band_limited_products():
    g = SpectralGrid((16, 16), (1.0, 2.0))
    X, Y = g.coords()
    a = np.sin(2 * np.pi * 7 * X) * np.cos(np.pi * 5 * Y)
    ah = g.forward(a)
    prod = g.pad_forward(g.pad_backward(ah) ** 2)
    # a^2 has modes up to 14 in x, which the plain grid aliases; truncation keeps |k| < 8
    Xp, Yp = g.coords(padded=True)
    assert np.max(np.abs(g.pad_backward(ah) - np.sin(2 * np.pi * 7 * Xp) * np.cos(np.pi * 5 * Yp))) < 1e-13
    # a^2 = (1 - cos 28 pi x)(1 + cos 10 pi y) / 4; both oscillations lie beyond the cutoff
    expected = g.forward(np.full_like(X, 0.25))
    assert np.max(np.abs(prod - expected)) < 1e-14


def test_derivative_and_domain_lengths():
    g = SpectralGrid((32, 16), (2.0, 0.5), (-1.0, 0.0))
    X, Y = g.coords()
    u = np.sin(np.pi * X) * np.cos(4 * np.pi * Y)
    grad = g.grad(g.forward(u))
    assert np.max(np.abs(g.backward(grad[0]) - np.pi * np.cos(np.pi * X) * np.cos(4 * np.pi * Y))) < 1e-12
    assert np.max(np.abs(g.backward(grad[1]) + 4 * np.pi * np.sin(np.pi * X) * np.sin(4 * np.pi * Y))) < 1e-12


def test_inner_product_is_volume_mean():
    g = SpectralGrid((8, 8, 8))
    rng = np.random.default_rng(1)
    a, b = (g.backward(g.forward(rng.standard_normal((8, 8, 8)))) for _ in range(2))
    assert g.inner(g.forward(a), g.forward(b)) == pytest.approx(np.mean(a * b), rel=1e-12)


def test_odd_grid_rejected():
    with pytest.raises(ValueError):
        SpectralGrid((9, 8))
