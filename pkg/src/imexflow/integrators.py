"""IMEX steppers for split systems du/dt = f_c(u) + f_d(nu, u).

The explicit part ``f_c`` is advanced explicitly, the diffusive part ``f_d``
(linear in ``u`` for frozen ``nu``) implicitly. A diffusivity that depends on
the solution is handled semi-implicitly: it is frozen, extrapolated or
predicted so that every implicit solve stays linear.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .tableaux import ImexTableau, builtin_tableau

__all__ = [
    "SplitSystem",
    "Bdf2History",
    "BDF2_COEFFS",
    "EULER_COEFFS",
    "imex_euler_step",
    "bdf2_step",
    "imex_rk_step_const",
    "imex_rk_step_var",
    "linear_scalar_system",
]

# (alpha_0, alpha_1, beta_0, beta_1, gamma_0)
BDF2_COEFFS = (2.0, -0.5, 2.0, -1.0, 1.5)
EULER_COEFFS = (1.0, 0.0, 1.0, 0.0, 1.0)


@dataclass
class SplitSystem:
    """IMEX right-hand side.

    f_c(t, u)                  explicit tendency
    f_d(t, nu, u)              diffusive tendency, linear in u
    implicit_solve(t, nu, gamma, g)
                               returns u with u - gamma * f_d(t, nu, u) = g
    nu_of(t, u)                diffusivity; ``None`` means the problem has no
                               solution-dependent diffusivity
    """

    f_c: Callable
    f_d: Callable
    implicit_solve: Callable
    nu_of: Callable | None = None
    nu_const: Any = None

    @property
    def constant_nu(self) -> bool:
        return self.nu_of is None

    def nu(self, t, u):
        return self.nu_const if self.nu_of is None else self.nu_of(t, u)


def linear_scalar_system(lam_c, lam_d) -> SplitSystem:
    """u' = lam_c u + lam_d u; works elementwise on arrays of states and lambdas."""

    def solve(t, nu, gamma, g):
        denom = 1.0 - gamma * lam_d
        if np.any(denom == 0):
            raise ZeroDivisionError("singular implicit stage")
        return g / denom

    return SplitSystem(
        f_c=lambda t, u: lam_c * u,
        f_d=lambda t, nu, u: lam_d * u,
        implicit_solve=solve,
    )


def imex_euler_step(sys: SplitSystem, u, t: float, dt: float):
    """u' - dt f_d(nu(u), u') = u + dt f_c(u), diffusivity frozen at t."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    nu = sys.nu(t, u)
    return sys.implicit_solve(t + dt, nu, dt, u + dt * sys.f_c(t, u))


@dataclass
class Bdf2History:
    """Two time levels of IMEX BDF2 with their cached tendencies and diffusivities."""

    u_curr: Any
    t: float
    u_prev: Any = None
    fc_curr: Any = None
    fc_prev: Any = None
    nu_curr: Any = None
    nu_prev: Any = None
    dt: float | None = None
    steps: int = 0

    @classmethod
    def start(cls, u0, t0: float = 0.0) -> "Bdf2History":
        return cls(u_curr=u0, t=t0)


def bdf2_step(sys: SplitSystem, hist: Bdf2History, dt: float):
    """Advance ``hist`` by one IMEX BDF2 step (IMEX Euler on the first call).

    The step size must stay fixed; the coefficients assume equidistant levels.
    Returns the new state; ``hist`` is updated in place.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if hist.dt is not None and dt != hist.dt:
        raise ValueError(f"IMEX BDF2 needs a fixed step: started with {hist.dt}, got {dt}")
    t = hist.t
    u = hist.u_curr
    if hist.fc_curr is None:
        hist.fc_curr = sys.f_c(t, u)
        hist.nu_curr = sys.nu(t, u)

    first = hist.steps == 0
    a0, a1, b0, b1, g0 = EULER_COEFFS if first else BDF2_COEFFS
    if first:
        rhs = a0 * u + dt * b0 * hist.fc_curr
        nu_ext = hist.nu_curr
    else:
        rhs = a0 * u + a1 * hist.u_prev + dt * (b0 * hist.fc_curr + b1 * hist.fc_prev)
        nu_ext = hist.nu_curr if sys.constant_nu else b0 * hist.nu_curr + b1 * hist.nu_prev
    u_new = sys.implicit_solve(t + dt, nu_ext, dt / g0, rhs / g0)

    hist.u_prev, hist.fc_prev, hist.nu_prev = u, hist.fc_curr, hist.nu_curr
    hist.u_curr = u_new
    hist.t = t + dt
    hist.fc_curr = sys.f_c(hist.t, u_new)
    hist.nu_curr = sys.nu(hist.t, u_new)
    hist.dt = dt
    hist.steps += 1
    return u_new


def _as_tableau(tab) -> ImexTableau:
    return builtin_tableau(tab) if isinstance(tab, str) else tab


def _imex_rk(sys: SplitSystem, tab: ImexTableau, u, t: float, dt: float, predict_nu: bool):
    if dt <= 0:
        raise ValueError("dt must be positive")
    tab = _as_tableau(tab)
    c, a_im, a_ex = tab.c, tab.a_im, tab.a_ex
    nu = sys.nu(t, u)
    nus = [nu]
    fc = [sys.f_c(t, u)]
    fd = [sys.f_d(t, nu, u)]
    for i in range(1, tab.s):
        ti = t + c[i] * dt
        if predict_nu:
            v = u
            for j in range(i):
                if a_ex[i, j] != 0.0:
                    v = v + dt * a_ex[i, j] * (fc[j] + fd[j])
            nu = sys.nu(ti, v)
        rhs = u
        for j in range(i):
            if a_ex[i, j] != 0.0:
                rhs = rhs + dt * a_ex[i, j] * fc[j]
            if a_im[i, j] != 0.0:
                rhs = rhs + dt * a_im[i, j] * fd[j]
        if a_im[i, i] != 0.0:
            ui = sys.implicit_solve(ti, nu, dt * a_im[i, i], rhs)
        else:
            ui = rhs
        nus.append(nu)
        fc.append(sys.f_c(ti, ui))
        fd.append(sys.f_d(ti, nu, ui))
    out = u
    for i in range(tab.s):
        if tab.b_ex[i] != 0.0:
            out = out + dt * tab.b_ex[i] * fc[i]
        if tab.b_im[i] != 0.0:
            out = out + dt * tab.b_im[i] * fd[i]
    return out


def imex_rk_step_const(sys: SplitSystem, tab: ImexTableau | str, u, t: float, dt: float):
    """One IMEX RK step for a diffusivity that does not depend on ``u``."""
    return _imex_rk(sys, tab, u, t, dt, predict_nu=False)


def imex_rk_step_var(sys: SplitSystem, tab: ImexTableau | str, u, t: float, dt: float):
    """Semi-implicit partitioned RK step for solution-dependent diffusivity.

    Each stage first predicts the solution with the explicit coefficients and
    the full tendencies of the previous stages, evaluates the diffusivity
    there, and then solves the linearly implicit stage equation with that
    diffusivity frozen. With a constant diffusivity the result is identical to
    :func:`imex_rk_step_const`.
    """
    return _imex_rk(sys, tab, u, t, dt, predict_nu=not sys.constant_nu)
