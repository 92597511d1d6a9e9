import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imexflow.quadrature import gll_nodes, gll_reference_nodes, lagrange_interpolate, sdc_weights


def test_gll_three_subintervals():
    x = gll_reference_nodes(3)
    assert x == pytest.approx([-1, -1 / np.sqrt(5), 1 / np.sqrt(5), 1], abs=1e-15)
    g = gll_nodes(3, 0.0, 1.0)
    assert g.nodes[1:3] == pytest.approx([0.27639320225002106, 0.7236067977499789], abs=1e-15)


def test_weights_integrate_lobatto_rule():
    w = sdc_weights(gll_nodes(3, 0.0, 1.0))
    # summed over subintervals: the Lobatto quadrature weights
    assert w.sum(axis=1) == pytest.approx([1 / 12, 5 / 12, 5 / 12, 1 / 12], abs=1e-15)
    # summed over basis functions: the subinterval lengths
    assert w.sum(axis=0) == pytest.approx(np.diff(gll_nodes(3, 0, 1).nodes), abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(M=st.integers(1, 6), t0=st.floats(-5, 5), h=st.floats(0.01, 3))
def test_weights_exact_for_polynomials(M, t0, h):
    g = gll_nodes(M, t0, t0 + h)
    w = sdc_weights(g)
    for p in range(M + 1):
        vals = g.nodes**p
        integrals = (g.nodes[1:] ** (p + 1) - g.nodes[:-1] ** (p + 1)) / (p + 1)
        assert vals @ w == pytest.approx(integrals, rel=1e-9, abs=1e-9)


def test_interpolation_reproduces_cubic():
    g = gll_nodes(3, 0.0, 1.0)
    assert lagrange_interpolate(g, g.nodes**3, 0.5) == pytest.approx(0.125, abs=1e-15)


def test_invalid_interval():
    with pytest.raises(ValueError):
        gll_nodes(3, 1.0, 1.0)
