import numpy as np
import pytest
from scipy.linalg import solve

from imexflow.integrators import imex_euler_step, linear_scalar_system
from imexflow.quadrature import gll_nodes, sdc_weights
from imexflow.sdc import SdcConfig, parse_sdc_name, sdc_step, substep_count


def lobatto_collocation(lam, M, dt):
    """Dense collocation on the Lobatto nodes for u' = lam u, u(0) = 1."""
    g = gll_nodes(M, 0.0, dt)
    w = sdc_weights(g)
    Q = np.zeros((M + 1, M + 1), dtype=complex)
    for m in range(1, M + 1):
        Q[m] = Q[m - 1] + w[:, m - 1]
    A = np.eye(M + 1) - lam * Q
    return solve(A, np.ones(M + 1, dtype=complex))


def test_names_and_order():
    cfg = parse_sdc_name("SDC-CB3e(3,3)")
    assert (cfg.M, cfg.K, cfg.predictor) == (3, 3, "RK-CB3e")
    assert cfg.order == 6 and cfg.name == "SDC-CB3e(3,3)"
    assert SdcConfig(3, 5).order == 6
    assert SdcConfig(3, 2).order == 3


def test_substep_counts():
    assert substep_count(SdcConfig(3, 5)) == 18
    assert substep_count(SdcConfig(3, 3, "RK-CB3e")) == 18
    assert substep_count(SdcConfig(3, 3, "RK-ARS3")) == 21


@pytest.mark.parametrize("pred", ["IMEX-Euler", "RK-CB3e", "RK-ARS3"])
def test_converges_to_collocation(pred):
    lam_c, lam_d = -1j, -1.0
    sys = linear_scalar_system(lam_c, lam_d)
    nodes = sdc_step(sys, SdcConfig(3, 20, pred), 1.0 + 0j, 0.0, 0.25, return_nodes=True)
    ref = lobatto_collocation(lam_c + lam_d, 3, 0.25)
    assert np.max(np.abs(np.array(nodes) - ref)) <= 1e-13


def test_k0_m1_is_euler():
    sys = linear_scalar_system(-2j, -1.0)
    a = sdc_step(sys, SdcConfig(1, 0), 1.0 + 0j, 0.0, 0.1)
    assert a == imex_euler_step(sys, 1.0 + 0j, 0.0, 0.1)


def test_sixth_order():
    sys = linear_scalar_system(-1j, -1.0)
    errs = []
    for n in (8, 16):
        u = 1.0 + 0j
        for i in range(n):
            u = sdc_step(sys, SdcConfig(3, 5), u, i / n, 1.0 / n)
        errs.append(abs(u - np.exp(-1 - 1j)))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(6.0, abs=0.15)


def test_bad_name():
    with pytest.raises(KeyError):
        parse_sdc_name("SDC-XX(3,3)")
