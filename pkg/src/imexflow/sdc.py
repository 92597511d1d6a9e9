"""Semi-implicit spectral deferred correction (SISDC) for split ODE systems."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .integrators import SplitSystem, imex_euler_step, imex_rk_step_var
from .quadrature import SdcGrid, gll_nodes, sdc_weights
from .tableaux import ImexTableau, builtin_tableau

__all__ = ["SdcConfig", "sdc_step", "substep_count", "parse_sdc_name"]

_PREDICTOR_ALIASES = {
    "Eu": "IMEX-Euler",
    "Euler": "IMEX-Euler",
    "IMEX-Euler": "IMEX-Euler",
    "TR": "RK-TR",
    "CB2": "RK-CB2",
    "CB3c": "RK-CB3c",
    "CB3e": "RK-CB3e",
    "CB4": "RK-CB4",
    "ARS3": "RK-ARS3",
}
_SDC_RE = re.compile(r"^SDC-([A-Za-z0-9-]+)\((\d+),\s*(\d+)\)$")


@dataclass(frozen=True)
class SdcConfig:
    """``M`` Lobatto subintervals, ``K`` correction sweeps, and a predictor."""

    M: int
    K: int
    predictor: str = "IMEX-Euler"

    def __post_init__(self):
        if self.M < 1 or self.K < 0:
            raise ValueError("need M >= 1 and K >= 0")
        name = _PREDICTOR_ALIASES.get(self.predictor, self.predictor)
        builtin_tableau(name)  # validates
        object.__setattr__(self, "predictor", name)

    @property
    def euler_predictor(self) -> bool:
        return self.predictor == "IMEX-Euler"

    @property
    def tableau(self) -> ImexTableau:
        return builtin_tableau(self.predictor)

    @property
    def order(self) -> int:
        return min(self.tableau.declared_order + self.K, 2 * self.M)

    @property
    def name(self) -> str:
        short = {v: k for k, v in _PREDICTOR_ALIASES.items() if k not in ("Euler", "IMEX-Euler")}
        return f"SDC-{short[self.predictor]}({self.M},{self.K})"

    def grid(self, t: float, dt: float) -> SdcGrid:
        g = gll_nodes(self.M, t, t + dt)
        return SdcGrid(g.M, g.nodes, sdc_weights(g))


def parse_sdc_name(name: str) -> SdcConfig:
    """``"SDC-Eu(3,5)"`` -> ``SdcConfig(3, 5, "IMEX-Euler")``."""
    m = _SDC_RE.match(name.strip())
    if not m or m.group(1) not in _PREDICTOR_ALIASES:
        raise KeyError(f"not an SDC method name: {name!r}")
    return SdcConfig(int(m.group(2)), int(m.group(3)), m.group(1))


def substep_count(cfg: SdcConfig) -> int:
    """Nontrivial substeps per step: M(K+1) for Euler, M(K+s-1) for an s-stage RK predictor."""
    if cfg.euler_predictor:
        return cfg.M * (cfg.K + 1)
    return cfg.M * (cfg.K + cfg.tableau.s - 1)


def predictor_sweep(sys: SplitSystem, cfg: SdcConfig, grid: SdcGrid, u):
    nodes = grid.nodes
    out = [u]
    for m in range(1, cfg.M + 1):
        dtm = nodes[m] - nodes[m - 1]
        if cfg.euler_predictor:
            out.append(imex_euler_step(sys, out[-1], nodes[m - 1], dtm))
        else:
            out.append(imex_rk_step_var(sys, cfg.tableau, out[-1], nodes[m - 1], dtm))
    return out


def correction_sweeps(sys: SplitSystem, grid: SdcGrid, nodal: list, K: int) -> list:
    """Apply ``K`` IMEX Euler correction sweeps to the nodal values ``nodal``.

    Node m is updated from node m-1 by solving

        u_m - dt_m f_d(nu_{m-1}^{k+1}, u_m) = u_{m-1}^{k+1}
            + dt_m [f_c(u_{m-1}^{k+1}) - f_c(u_{m-1}^k) - f_d(nu_{m-1}^k, u_m^k)]
            + sum_q w[q, m] f(u_q^k)
    """
    t = grid.nodes
    M = grid.M
    w = grid.weights
    dts = grid.lengths
    u = list(nodal)
    nu = [sys.nu(t[m], u[m]) for m in range(M + 1)]
    fc = [sys.f_c(t[m], u[m]) for m in range(M + 1)]
    f_local = [fc[m] + sys.f_d(t[m], nu[m], u[m]) for m in range(M + 1)]
    # implicit term of the previous sweep, lagged diffusivity
    f_im = [None] + [sys.f_d(t[m], nu[m - 1], u[m]) for m in range(1, M + 1)]

    for _ in range(K):
        new_u = [u[0]]
        new_nu = [nu[0]]
        new_fc = [fc[0]]
        for m in range(1, M + 1):
            quad = 0
            for q in range(M + 1):
                quad = quad + w[q, m - 1] * f_local[q]
            rhs = (new_u[m - 1]
                   + dts[m - 1] * (new_fc[m - 1] - fc[m - 1] - f_im[m])
                   + quad)
            um = sys.implicit_solve(t[m], new_nu[m - 1], dts[m - 1], rhs)
            new_u.append(um)
            new_nu.append(sys.nu(t[m], um))
            new_fc.append(sys.f_c(t[m], um))
        u, nu, fc = new_u, new_nu, new_fc
        f_local = [fc[m] + sys.f_d(t[m], nu[m], u[m]) for m in range(M + 1)]
        f_im = [None] + [sys.f_d(t[m], nu[m - 1], u[m]) for m in range(1, M + 1)]
    return u


def sdc_step(sys: SplitSystem, cfg: SdcConfig, u, t: float, dt: float, return_nodes: bool = False):
    """One SISDC step of size ``dt``: predictor sweep plus ``cfg.K`` corrections."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    grid = cfg.grid(t, dt)
    nodal = predictor_sweep(sys, cfg, grid, u)
    nodal = correction_sweeps(sys, grid, nodal, cfg.K)
    return nodal if return_nodes else nodal[-1]
