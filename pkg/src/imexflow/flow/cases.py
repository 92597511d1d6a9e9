"""Exact solutions, forcing and ready-made periodic test problems."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .operators import NavierStokes, ViscosityModel
from .spectral import SpectralGrid

__all__ = [
    "tg_exact",
    "tg_decay_exact",
    "vv_exact",
    "vv_gradient",
    "vv_viscosity",
    "vv_forcing",
    "brachet_initial",
    "FlowCase",
    "tgp_case",
    "vvp_case",
    "brachet_case",
    "momentum_residual",
]

TWO_PI = 2.0 * np.pi


# -- traveling Taylor-Green vortex ----------------------------------------------
def tg_exact(x, y, t, nu):
    """Taylor-Green vortex translating with unit speed along x and y."""
    a = TWO_PI * (x - t)
    b = TWO_PI * (y - 0.125 - t)
    decay = np.exp(-8 * np.pi**2 * nu * t)
    vx = 1.0 + np.sin(a) * np.cos(b) * decay
    vy = 1.0 - np.cos(a) * np.sin(b) * decay
    p = 0.25 * (np.cos(2 * a) + np.cos(2 * b)) * np.exp(-16 * np.pi**2 * nu * t)
    return vx, vy, p


def tg_decay_exact(x, y, t, nu):
    """Stationary (non-translating) decaying Taylor-Green vortex."""
    a = TWO_PI * x
    b = TWO_PI * (y - 0.125)
    decay = np.exp(-8 * np.pi**2 * nu * t)
    return np.sin(a) * np.cos(b) * decay, -np.cos(a) * np.sin(b) * decay


# -- 3D vortex array with speed-dependent viscosity ----------------------------
def _vv_phases(x, y, z, t):
    return TWO_PI * (x + t), TWO_PI * (y + t), TWO_PI * (z + t)


def vv_exact(x, y, z, t):
    a, b, c = _vv_phases(x, y, z, t)
    vx = (np.sin(a) + np.cos(b)) * np.sin(c)
    vy = (np.cos(a) + np.sin(b)) * np.sin(c)
    vz = (np.cos(a) + np.cos(b)) * np.cos(c)
    p = np.sin(a) * np.sin(b) * np.sin(c)
    return vx, vy, vz, p


def vv_gradient(x, y, z, t):
    """G[i][j] = d v_i / d x_j of the vortex array."""
    a, b, c = _vv_phases(x, y, z, t)
    k = TWO_PI
    sa, ca, sb, cb, sc, cc = np.sin(a), np.cos(a), np.sin(b), np.cos(b), np.sin(c), np.cos(c)
    return [
        [k * ca * sc, -k * sb * sc, k * (sa + cb) * cc],
        [-k * sa * sc, k * cb * sc, k * (ca + sb) * cc],
        [-k * sa * cc, -k * sb * cc, -k * (ca + cb) * sc],
    ]


def vv_viscosity(v, nu0, nu1, v_max=2.0):
    """nu0 + nu1 (|v| / v_max)^2 for a velocity tuple or stacked array."""
    speed2 = sum(np.asarray(c) ** 2 for c in v)
    return nu0 + nu1 * speed2 / v_max**2


def vv_forcing(x, t, nu0, nu1, v_max=2.0):
    """Forcing that makes the vortex array an exact solution.

    ``x`` is a tuple of coordinate arrays. The solution travels with unit
    speed along each axis, so d_t v = sum_j d_j v. The Laplacian of every
    velocity component is -2 (2 pi)^2 times itself and the field is
    solenoidal, which leaves

        f_i = sum_j (1 + v_j) G_ij - sum_j d_j nu (G_ij + G_ji) - nu lap v_i + d_i p.
    """
    X, Y, Z = x
    vx, vy, vz, _ = vv_exact(X, Y, Z, t)
    v = (vx, vy, vz)
    G = vv_gradient(X, Y, Z, t)
    a, b, c = _vv_phases(X, Y, Z, t)
    k = TWO_PI
    gp = (
        k * np.cos(a) * np.sin(b) * np.sin(c),
        k * np.sin(a) * np.cos(b) * np.sin(c),
        k * np.sin(a) * np.sin(b) * np.cos(c),
    )
    nu = vv_viscosity(v, nu0, nu1, v_max)
    # d_j nu = 2 nu1 / v_max^2 * sum_l v_l G_lj
    scale = 2.0 * nu1 / v_max**2
    gnu = [scale * sum(v[l] * G[l][j] for l in range(3)) for j in range(3)]
    lap = -2.0 * k * k
    out = []
    for i in range(3):
        f = gp[i] - nu * lap * v[i]
        for j in range(3):
            f = f + (1.0 + v[j]) * G[i][j] - gnu[j] * (G[i][j] + G[j][i])
        out.append(f)
    return np.stack(out)


# -- Brachet Taylor-Green initial condition -------------------------------------
def brachet_initial(x, y, z):
    return np.cos(x) * np.sin(y) * np.sin(z), -np.sin(x) * np.cos(y) * np.sin(z), np.zeros_like(x)


# -- problem bundles ------------------------------------------------------------
@dataclass
class FlowCase:
    """A flow problem: operators, initial data and optional exact solution."""

    name: str
    ns: NavierStokes
    initial: np.ndarray
    exact: Optional[Callable[[float], np.ndarray]]
    v_ref: float
    t0: float = 0.0

    def initial_spectral(self) -> np.ndarray:
        return self.ns.to_spectral(self.initial)


def tgp_case(n: int = 64, nu: float = 0.02, **solver_opts) -> FlowCase:
    grid = SpectralGrid((n, n), (1.0, 1.0), (-0.5, -0.5))
    ns = NavierStokes(grid, ViscosityModel(nu), None, **solver_opts)
    X, Y = grid.coords()

    def exact(t):
        vx, vy, _ = tg_exact(X, Y, t, nu)
        return np.stack([vx, vy])

    return FlowCase("tgp", ns, exact(0.0), exact, v_ref=2.0)


def vvp_case(n: int = 24, nu0: float = 0.01, nu1: float = 0.01, **solver_opts) -> FlowCase:
    grid = SpectralGrid((n, n, n), (1.0,) * 3, (-0.5,) * 3)
    X, Y, Z = grid.coords()

    def forcing(t):
        return vv_forcing((X, Y, Z), t, nu0, nu1)

    ns = NavierStokes(grid, ViscosityModel(nu0, nu1, 2.0), forcing, **solver_opts)

    def exact(t):
        return np.stack(vv_exact(X, Y, Z, t)[:3])

    return FlowCase("vvp", ns, exact(0.0), exact, v_ref=2.0)


def brachet_case(n: int = 16, nu: float = 1.0 / 1600, **solver_opts) -> FlowCase:
    grid = SpectralGrid((n, n, n), (TWO_PI,) * 3, (-np.pi,) * 3)
    ns = NavierStokes(grid, ViscosityModel(nu), None, **solver_opts)
    X, Y, Z = grid.coords()
    return FlowCase("custom", ns, np.stack(brachet_initial(X, Y, Z)), None, v_ref=1.0)


def momentum_residual(n: int = 32, t: float = 0.3, nu0: float = 0.01, nu1: float = 0.01) -> float:
    """Max residual of the momentum equation for the exact vortex array.

    Every spatial term is evaluated spectrally from the sampled exact fields;
    the time derivative is sampled in closed form.
    """
    case = vvp_case(n, nu0, nu1)
    ns, grid = case.ns, case.ns.grid
    X, Y, Z = grid.coords()
    v_hat = ns.to_spectral(case.exact(t))
    p_hat = grid.forward(vv_exact(X, Y, Z, t)[3])
    G = vv_gradient(X, Y, Z, t)
    dvdt = np.stack([G[i][0] + G[i][1] + G[i][2] for i in range(3)])
    rhs = ns.full_rhs(ns.nu(v_hat), v_hat, t) - grid.grad(p_hat)
    return float(np.max(np.abs(dvdt - ns.to_physical(rhs))))
