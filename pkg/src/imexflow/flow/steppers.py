"""Projection-based IMEX time steppers for incompressible flow.

All steppers act on spectral velocity fields through a :class:`NavierStokes`
operator set. The viscous part is split so that only F_d1 = div(nu grad v)
is treated implicitly; the remaining viscous terms and convection are
explicit, and the divergence penalty F_d3 is added explicitly and removed
again in the implicit diffusion step.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..integrators import BDF2_COEFFS, EULER_COEFFS
from ..sdc import SdcConfig
from ..tableaux import ImexTableau
from .operators import NavierStokes, Nu, Tendencies

__all__ = [
    "FlowState",
    "FlowBdf2History",
    "InstabilityError",
    "bdf2_flow_step",
    "euler_flow_step",
    "rk_flow_step",
    "sdc_flow_step",
    "FlowStepper",
]


@dataclass
class FlowState:
    v: np.ndarray  # spectral velocity, shape (d, *spec_shape)
    t: float


class InstabilityError(RuntimeError):
    pass


def _explicit_sum(t: Tendencies) -> np.ndarray:
    """F_c + F_d + F_d3."""
    return t.fc + t.d1 + t.d2 + 2.0 * t.d3


def _add(a, b, scale=1.0):
    return a if b is None else a + scale * b


# -- BDF2 -----------------------------------------------------------------------
@dataclass
class FlowBdf2History:
    """Explicit terms, implicit corrections and viscosity at levels n and n-1."""

    expl: np.ndarray
    impl: np.ndarray
    nu: Nu
    expl_prev: Optional[np.ndarray] = None
    impl_prev: Optional[np.ndarray] = None
    nu_prev: Optional[Nu] = None
    v_prev: Optional[np.ndarray] = None
    dt: Optional[float] = None
    steps: int = 0

    @classmethod
    def start(cls, ns: NavierStokes, state: FlowState) -> "FlowBdf2History":
        nu = ns.nu(state.v)
        tend = ns.tendencies(nu, state.v)
        return cls(_explicit_sum(tend), tend.d1 + tend.d3, nu)


def bdf2_flow_step(ns: NavierStokes, state: FlowState, hist: FlowBdf2History, dt: float,
                   final_projection: Optional[bool] = None) -> FlowState:
    """One IMEX BDF2 step (IMEX Euler on the first call); ``hist`` is updated in place."""
    if hist.dt is not None and abs(dt - hist.dt) > 1e-14 * hist.dt:
        raise ValueError("BDF2 requires a constant step size")
    first = hist.steps == 0
    a0, a1, b0, b1, g0 = EULER_COEFFS if first else BDF2_COEFFS
    t_new = state.t + dt

    # extrapolation
    rhs = a0 * state.v + dt * b0 * hist.expl
    if not first:
        rhs = rhs + a1 * hist.v_prev + dt * b1 * hist.expl_prev
    rhs = _add(rhs, ns.forcing_term(t_new), dt)
    v1 = rhs / g0
    # projection
    v2, _ = ns.project(v1)
    # diffusion with extrapolated viscosity
    if first:
        nu_ext, corr = hist.nu, b0 * hist.impl
    else:
        nu_ext = b0 * hist.nu + b1 * hist.nu_prev
        corr = b0 * hist.impl + b1 * hist.impl_prev
    v3 = ns.helmholtz(nu_ext, dt / g0, v2 - (dt / g0) * corr)
    # additional projection
    if final_projection is None:
        final_projection = not ns.constant_nu
    v_new = ns.project(v3)[0] if final_projection else v3

    nu_new = ns.nu(v_new)
    tend = ns.tendencies(nu_new, v_new)
    hist.expl_prev, hist.impl_prev, hist.nu_prev = hist.expl, hist.impl, hist.nu
    hist.expl, hist.impl, hist.nu = _explicit_sum(tend), tend.d1 + tend.d3, nu_new
    hist.v_prev = state.v
    hist.dt = dt
    hist.steps += 1
    return FlowState(v_new, t_new)


def euler_flow_step(ns: NavierStokes, state: FlowState, dt: float,
                    final_projection: Optional[bool] = None) -> FlowState:
    """One IMEX Euler flow step with viscosity frozen at the step start."""
    return bdf2_flow_step(ns, state, FlowBdf2History.start(ns, state), dt, final_projection)


# -- IMEX Runge-Kutta -----------------------------------------------------------
def _rk_needs(tab: ImexTableau):
    """Which stage tendencies and forcing evaluations are referenced."""
    s = tab.s
    inc_ex = tab.b_ex - tab.a_ex[s - 1]
    inc_im = tab.b_im - tab.a_im[s - 1]
    need_terms = np.zeros(s, dtype=bool)
    need_force = np.zeros(s, dtype=bool)
    for j in range(s):
        later_ex = np.any(tab.a_ex[j + 1:, j] != 0)
        later_im = np.any(tab.a_im[j + 1:, j] != 0)
        need_terms[j] = later_ex or later_im or inc_ex[j] != 0 or inc_im[j] != 0
        need_force[j] = np.any(tab.a_im[1:, j] != 0) or inc_im[j] != 0
    return need_terms, need_force, inc_ex, inc_im


def rk_flow_step(ns: NavierStokes, state: FlowState, tab: ImexTableau, dt: float,
                 final_projection: Optional[bool] = None) -> FlowState:
    """One IMEX Runge-Kutta step with per-stage projection.

    ``final_projection`` defaults to projecting when the viscosity is variable
    or when the explicit assembly increment (b_ex - a_ex[s]) is nonzero, since
    that increment carries unprojected convective contributions.
    """
    s = tab.s
    a_ex, a_im, c = tab.a_ex, tab.a_im, tab.c
    need_terms, need_force, inc_ex, inc_im = _rk_needs(tab)
    t = state.t
    forcing = ns.forcing is not None
    fs = [ns.forcing_term(t + c[j] * dt) if forcing and need_force[j] else None for j in range(s)]

    v_stage = state.v
    nu_stage = ns.nu(state.v)
    terms: list = [None] * s
    expl: list = [None] * s
    if need_terms[0]:
        terms[0] = ns.tendencies(nu_stage, v_stage)
        expl[0] = _explicit_sum(terms[0])
    for i in range(1, s):
        vp = state.v.copy()
        for j in range(i):
            if a_ex[i, j] != 0:
                vp += dt * a_ex[i, j] * expl[j]
        if forcing:
            for j in range(i + 1):
                if a_im[i, j] != 0:
                    vp += dt * a_im[i, j] * fs[j]
        vpp, _ = ns.project(vp)
        nu_stage = ns.nu(vpp)
        g = vpp
        for j in range(i):
            wd1 = a_im[i, j] - a_ex[i, j]
            if wd1 != 0:
                g = g + dt * wd1 * terms[j].d1
            if a_ex[i, j] != 0:
                g = g - dt * a_ex[i, j] * terms[j].d3
        v_stage = ns.helmholtz(nu_stage, dt * a_im[i, i], g)
        if need_terms[i]:
            terms[i] = ns.tendencies(nu_stage, v_stage)
            expl[i] = _explicit_sum(terms[i])

    v_new = v_stage.copy()
    for i in range(s):
        if inc_ex[i] != 0:
            tr = terms[i]
            v_new += dt * inc_ex[i] * (tr.fc + tr.d2 + tr.d3)
        if inc_im[i] != 0:
            v_new += dt * inc_im[i] * terms[i].d1
            if forcing:
                v_new += dt * inc_im[i] * fs[i]
    if final_projection is None:
        final_projection = (not ns.constant_nu) or bool(np.any(inc_ex != 0))
    if final_projection:
        v_new, _ = ns.project(v_new)
    return FlowState(v_new, t + dt)


# -- SISDC ----------------------------------------------------------------------
def sdc_flow_step(ns: NavierStokes, state: FlowState, cfg: SdcConfig, dt: float,
                  final_projection: Optional[bool] = None) -> FlowState:
    """One semi-implicit SDC step: predictor sweep plus K IMEX Euler corrections.

    The implicit cache F^IM_m holds F_d1 evaluated with the viscosity of the
    preceding node, in every sweep, so that the correction terms cancel when
    the iteration has converged.
    """
    grid = cfg.grid(state.t, dt)
    M = cfg.M
    tm = grid.nodes
    dts = grid.lengths
    w = grid.weights
    if final_projection is None:
        final_projection = not ns.constant_nu

    # predictor sweep
    v = [state.v]
    for m in range(M):
        cur = FlowState(v[m], tm[m])
        if cfg.euler_predictor:
            nxt = euler_flow_step(ns, cur, dts[m], final_projection)
        else:
            nxt = rk_flow_step(ns, cur, cfg.tableau, dts[m])
        v.append(nxt.v)
    if cfg.K == 0:
        return FlowState(v[M], state.t + dt)

    def node_terms(vm, num, t_node):
        tend = ns.tendencies(num, vm, t_node)
        fex = tend.fc + tend.d2 + tend.d3
        full = fex + tend.d1
        if tend.fs is not None:
            full = full + tend.fs
        return fex, full

    nu = [ns.nu(vm) for vm in v]
    fex, full = zip(*(node_terms(v[m], nu[m], tm[m]) for m in range(M + 1)))
    fex, full = list(fex), list(full)
    fim = [None] + [ns.d1(nu[m - 1], v[m]) for m in range(1, M + 1)]

    for _ in range(cfg.K):
        v_new, nu_new, fex_new, full_new, fim_new = [v[0]], [nu[0]], [fex[0]], [full[0]], [None]
        for m in range(1, M + 1):
            h = dts[m - 1]
            d1p, _, d3p = ns.viscous(nu_new[m - 1], v[m])
            quad = sum(w[q, m - 1] * full[q] for q in range(M + 1))
            vp = v_new[m - 1] + h * (fex_new[m - 1] + d1p + d3p - (fex[m - 1] + fim[m])) + quad
            vpp, _ = ns.project(vp)
            v3 = ns.helmholtz(nu_new[m - 1], h, vpp - h * (d1p + d3p))
            if final_projection:
                v3, _ = ns.project(v3)
            nu_m = ns.nu(v3)
            fe, fu = node_terms(v3, nu_m, tm[m])
            v_new.append(v3)
            nu_new.append(nu_m)
            fex_new.append(fe)
            full_new.append(fu)
            fim_new.append(ns.d1(nu_new[m - 1], v3))
        v, nu, fex, full, fim = v_new, nu_new, fex_new, full_new, fim_new
    return FlowState(v[M], state.t + dt)


# -- driver ---------------------------------------------------------------------
class FlowStepper:
    """Uniform interface over the flow steppers for a fixed method and step."""

    def __init__(self, ns: NavierStokes, method, dt: float, final_projection: Optional[bool] = None):
        self.ns = ns
        self.method = method
        self.dt = dt
        self.final_projection = final_projection
        self._hist: Optional[FlowBdf2History] = None

    def step(self, state: FlowState) -> FlowState:
        m = self.method
        if m == "BDF2":
            if self._hist is None:
                self._hist = FlowBdf2History.start(self.ns, state)
            return bdf2_flow_step(self.ns, state, self._hist, self.dt, self.final_projection)
        if isinstance(m, SdcConfig):
            return sdc_flow_step(self.ns, state, m, self.dt, self.final_projection)
        if isinstance(m, ImexTableau):
            if m.name == "IMEX-Euler":
                return euler_flow_step(self.ns, state, self.dt, self.final_projection)
            return rk_flow_step(self.ns, state, m, self.dt, self.final_projection)
        raise TypeError(f"unsupported method {m!r}")
