"""Spatial operators of the incompressible Navier-Stokes equations.

The momentum right-hand side is split as

    F_c  = -div(v v)             convection
    F_d1 =  div(nu grad v)
    F_d2 =  div(nu (grad v)^T)
    F_d3 = -grad(nu div v)       divergence penalty
    F_s  =  f                    forcing

with the viscosity either constant or a function of the local speed.
Products with nu and the quadratic convection term are dealiased by the
3/2 rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .spectral import SpectralGrid

__all__ = [
    "ViscosityModel",
    "SolverStats",
    "HelmholtzConvergenceError",
    "Tendencies",
    "NavierStokes",
    "cfl_number",
]

Nu = Union[float, np.ndarray]


@dataclass(frozen=True)
class ViscosityModel:
    """nu = nu0 + nu1 * (|v| / v_ref)^2; constant when nu1 == 0."""

    nu0: float
    nu1: float = 0.0
    v_ref: float = 2.0

    def __post_init__(self):
        if self.nu0 <= 0 or self.nu1 < 0:
            raise ValueError("viscosity coefficients must satisfy nu0 > 0, nu1 >= 0")

    @property
    def constant(self) -> bool:
        return self.nu1 == 0.0

    def __call__(self, speed2):
        return self.nu0 + self.nu1 * np.asarray(speed2) / self.v_ref**2


class HelmholtzConvergenceError(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"Helmholtz solve did not converge: {iterations} iterations, "
                         f"relative residual {residual:.3e}")
        self.iterations = iterations
        self.residual = residual


@dataclass
class SolverStats:
    projections: int = 0
    max_divergence: float = 0.0
    helmholtz_solves: int = 0
    helmholtz_iterations: int = 0
    helmholtz_max_iterations: int = 0
    helmholtz_max_residual: float = 0.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Tendencies:
    """Spectral tendency terms of one velocity field at one viscosity."""

    fc: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    fs: Optional[np.ndarray] = None

    @property
    def fd(self) -> np.ndarray:
        return self.d1 + self.d2 + self.d3


class NavierStokes:
    """Periodic incompressible flow operators on a :class:`SpectralGrid`.

    ``forcing`` maps a time to a physical vector field of shape (d, *grid.shape)
    or is None.
    """

    def __init__(
        self,
        grid: SpectralGrid,
        viscosity: ViscosityModel,
        forcing: Optional[Callable[[float], np.ndarray]] = None,
        helmholtz_tol: float = 1e-12,
        helmholtz_maxiter: int = 500,
        helmholtz_method: str = "cg",
    ):
        if helmholtz_method not in ("cg", "fixed-point"):
            raise ValueError(f"unknown Helmholtz method {helmholtz_method!r}")
        self.grid = grid
        self.viscosity = viscosity
        self.forcing = forcing
        self.helmholtz_tol = helmholtz_tol
        self.helmholtz_maxiter = helmholtz_maxiter
        self.helmholtz_method = helmholtz_method
        self.stats = SolverStats()
        self._forcing_cache: dict = {}

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def constant_nu(self) -> bool:
        return self.viscosity.constant

    # -- fields -----------------------------------------------------------------
    def to_spectral(self, v: np.ndarray) -> np.ndarray:
        return self.grid.forward(v)

    def to_physical(self, v_hat: np.ndarray) -> np.ndarray:
        return self.grid.backward(v_hat)

    def zeros(self) -> np.ndarray:
        return np.zeros((self.dim,) + self.grid.spec_shape, dtype=complex)

    def nu(self, v_hat: np.ndarray) -> Nu:
        """Viscosity of ``v_hat``: a float, or its values on the padded grid."""
        if self.constant_nu:
            return float(self.viscosity.nu0)
        vp = self.grid.pad_backward(v_hat)
        return self.viscosity(np.sum(vp * vp, axis=0))

    def forcing_term(self, t: float) -> Optional[np.ndarray]:
        if self.forcing is None:
            return None
        key = float(t)
        hit = self._forcing_cache.get(key)
        if hit is None:
            hit = self.grid.forward(self.forcing(key))
            if len(self._forcing_cache) > 32:
                self._forcing_cache.clear()
            self._forcing_cache[key] = hit
        return hit

    # -- tendencies -------------------------------------------------------------
    def convection(self, v_hat: np.ndarray) -> np.ndarray:
        g = self.grid
        vp = g.pad_backward(v_hat)
        out = np.zeros_like(v_hat)
        for i in range(self.dim):
            for j in range(i, self.dim):
                q = g.pad_forward(vp[i] * vp[j])
                out[i] -= 1j * g.k[j] * q
                if j != i:
                    out[j] -= 1j * g.k[i] * q
        return out

    def _stress(self, nu: Nu, v_hat: np.ndarray) -> np.ndarray:
        """P[i, j] = coefficients of nu * d_j v_i."""
        grad = self.grid.grad(v_hat)
        if np.isscalar(nu) or np.ndim(nu) == 0:
            return float(nu) * grad
        return self.grid.pad_forward(nu * self.grid.pad_backward(grad))

    def viscous(self, nu: Nu, v_hat: np.ndarray):
        """(F_d1, F_d2, F_d3) for viscosity ``nu``."""
        k = self.grid.k
        d = self.dim
        p = self._stress(nu, v_hat)
        d1 = np.stack([sum(1j * k[j] * p[i, j] for j in range(d)) for i in range(d)])
        d2 = np.stack([sum(1j * k[j] * p[j, i] for j in range(d)) for i in range(d)])
        trace = sum(p[j, j] for j in range(d))
        d3 = np.stack([-1j * k[i] * trace for i in range(d)])
        return d1, d2, d3

    def d1(self, nu: Nu, v_hat: np.ndarray) -> np.ndarray:
        k = self.grid.k
        if np.isscalar(nu) or np.ndim(nu) == 0:
            return -float(nu) * self.grid.k2 * v_hat
        p = self._stress(nu, v_hat)
        return np.stack([sum(1j * k[j] * p[i, j] for j in range(self.dim)) for i in range(self.dim)])

    def tendencies(self, nu: Nu, v_hat: np.ndarray, t: Optional[float] = None) -> Tendencies:
        d1, d2, d3 = self.viscous(nu, v_hat)
        fs = self.forcing_term(t) if t is not None else None
        return Tendencies(self.convection(v_hat), d1, d2, d3, fs)

    def full_rhs(self, nu: Nu, v_hat: np.ndarray, t: float) -> np.ndarray:
        """F_c + F_d + F_s (the pressure term excluded)."""
        tend = self.tendencies(nu, v_hat, t)
        out = tend.fc + tend.fd
        if tend.fs is not None:
            out = out + tend.fs
        return out

    # -- projection -------------------------------------------------------------
    def project(self, v_hat: np.ndarray):
        """Remove the gradient part of ``v_hat``; returns (v - grad psi, psi)."""
        g = self.grid
        kv = g.k_dot(v_hat)
        psi = -1j * kv * g.inv_k2
        out = v_hat - np.stack([k * (kv * g.inv_k2) for k in g.k])
        self.stats.projections += 1
        self.stats.max_divergence = max(self.stats.max_divergence, g.relative_divergence(out))
        return out, psi

    # -- implicit diffusion -----------------------------------------------------
    def helmholtz_apply(self, nu: Nu, gamma: float, v_hat: np.ndarray) -> np.ndarray:
        return v_hat - gamma * self.d1(nu, v_hat)

    def helmholtz(self, nu: Nu, gamma: float, g_hat: np.ndarray) -> np.ndarray:
        """Solve v - gamma div(nu grad v) = g."""
        if gamma < 0:
            raise ValueError("gamma must be non-negative")
        st = self.stats
        st.helmholtz_solves += 1
        if gamma == 0:
            return g_hat.copy()
        if np.isscalar(nu) or np.ndim(nu) == 0:
            return g_hat / (1.0 + gamma * float(nu) * self.grid.k2)
        if self.helmholtz_method == "cg":
            v, it, res = self._pcg(nu, gamma, g_hat)
        else:
            v, it, res = self._fixed_point(nu, gamma, g_hat)
        st.helmholtz_iterations += it
        st.helmholtz_max_iterations = max(st.helmholtz_max_iterations, it)
        st.helmholtz_max_residual = max(st.helmholtz_max_residual, res)
        return v

    def _precond(self, nu: np.ndarray, gamma: float):
        return 1.0 / (1.0 + gamma * float(np.mean(nu)) * self.grid.k2)

    def _pcg(self, nu, gamma, g_hat):
        grid = self.grid
        gnorm = grid.norm(g_hat)
        if gnorm == 0:
            return np.zeros_like(g_hat), 0, 0.0
        minv = self._precond(nu, gamma)
        x = g_hat * minv
        r = g_hat - self.helmholtz_apply(nu, gamma, x)
        res = grid.norm(r) / gnorm
        z = r * minv
        p = z.copy()
        rz = grid.inner(r, z)
        it = 0
        while res > self.helmholtz_tol:
            if it >= self.helmholtz_maxiter:
                raise HelmholtzConvergenceError(it, res)
            ap = self.helmholtz_apply(nu, gamma, p)
            alpha = rz / grid.inner(p, ap)
            x = x + alpha * p
            r = r - alpha * ap
            it += 1
            res = grid.norm(r) / gnorm
            z = r * minv
            rz_new = grid.inner(r, z)
            p = z + (rz_new / rz) * p
            rz = rz_new
        # report the true residual rather than the recursively updated one
        res = grid.norm(g_hat - self.helmholtz_apply(nu, gamma, x)) / gnorm
        return x, it, res

    def _fixed_point(self, nu, gamma, g_hat):
        grid = self.grid
        gnorm = grid.norm(g_hat)
        if gnorm == 0:
            return np.zeros_like(g_hat), 0, 0.0
        nubar = float(np.mean(nu))
        minv = self._precond(nu, gamma)
        x = g_hat * minv
        for it in range(1, self.helmholtz_maxiter + 1):
            x = (g_hat + gamma * self.d1(nu - nubar, x)) * minv
            res = grid.norm(g_hat - self.helmholtz_apply(nu, gamma, x)) / gnorm
            if res <= self.helmholtz_tol:
                return x, it, res
        raise HelmholtzConvergenceError(self.helmholtz_maxiter, res)

    # -- diagnostics ------------------------------------------------------------
    def max_speed(self, v_hat: np.ndarray) -> float:
        v = self.to_physical(v_hat)
        return float(np.sqrt(np.max(np.sum(v * v, axis=0))))

    def cfl_number(self, dt: float, v_ref: float) -> float:
        return cfl_number(self.grid, dt, v_ref)


def cfl_number(grid: SpectralGrid, dt: float, v_ref: float) -> float:
    """dt * v_ref * |lambda_c|_max with |lambda_c|_max = pi * max(N / L)."""
    lam = np.pi * max(n / L for n, L in zip(grid.shape, grid.lengths))
    return float(dt * v_ref * lam)
