"""Gauss-Lobatto-Legendre subintervals, SDC integration weights and interpolation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

__all__ = ["SdcGrid", "gll_reference_nodes", "gll_nodes", "sdc_weights", "lagrange_interpolate"]


def gll_reference_nodes(M: int, tol: float = 1e-15, maxiter: int = 100) -> np.ndarray:
    """The ``M + 1`` Lobatto points on [-1, 1]: endpoints plus the roots of P'_M.

    Newton iteration on (1 - x^2) P'_M(x) = M (P_{M-1}(x) - x P_M(x)) started
    from Chebyshev-Gauss-Lobatto points.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    x = -np.cos(np.pi * np.arange(M + 1) / M)
    if M == 1:
        return x
    interior = x[1:-1].copy()
    for _ in range(maxiter):
        # Legendre recurrence for P_M, P_{M-1} and the derivative of (1-x^2)P'_M
        p_prev, p = np.ones_like(interior), interior.copy()
        for n in range(2, M + 1):
            p_prev, p = p, ((2 * n - 1) * interior * p - (n - 1) * p_prev) / n
        dp = M * (p_prev - interior * p) / (1 - interior**2)
        # (d/dx)[(1-x^2) P'_M] = -M(M+1) P_M
        delta = (1 - interior**2) * dp / (-M * (M + 1) * p)
        interior -= delta
        if np.max(np.abs(delta)) <= tol:
            break
    else:
        raise RuntimeError(f"GLL Newton iteration did not converge for M={M}")
    nodes = np.concatenate([[-1.0], np.sort(interior), [1.0]])
    # enforce exact symmetry
    return 0.5 * (nodes - nodes[::-1])


@dataclass(frozen=True)
class SdcGrid:
    """Lobatto subdivision of one step [t_start, t_end].

    ``weights[q, m-1]`` integrates the Lagrange basis polynomial of node q over
    subinterval m, i.e. from ``nodes[m-1]`` to ``nodes[m]``.
    """

    M: int
    nodes: np.ndarray
    weights: np.ndarray | None = None

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def bary(self) -> np.ndarray:
        t = self.nodes
        diff = t[:, None] - t[None, :]
        np.fill_diagonal(diff, 1.0)
        return 1.0 / np.prod(diff, axis=1)


def gll_nodes(M: int, t_start: float = 0.0, t_end: float = 1.0) -> SdcGrid:
    if not t_end > t_start:
        raise ValueError("t_end must exceed t_start")
    x = gll_reference_nodes(M)
    half = 0.5 * (t_end - t_start)
    nodes = t_start + half * (x + 1.0)
    nodes[0], nodes[-1] = t_start, t_end
    return SdcGrid(M, nodes)


def sdc_weights(grid: SdcGrid) -> np.ndarray:
    """Weight matrix w[q, m] by Gauss-Legendre quadrature of each Lagrange basis."""
    t = grid.nodes
    M = grid.M
    gx, gw = legendre.leggauss(M + 1)  # exact for degree 2M + 1 >= M
    w = np.empty((M + 1, M))
    for m in range(M):
        a, b = t[m], t[m + 1]
        tau = 0.5 * (b - a) * gx + 0.5 * (a + b)
        basis = _lagrange_basis(t, grid.bary, tau)  # (M+1, npts)
        w[:, m] = 0.5 * (b - a) * basis @ gw
    return w


def with_weights(grid: SdcGrid) -> SdcGrid:
    return SdcGrid(grid.M, grid.nodes, sdc_weights(grid))


def _lagrange_basis(nodes: np.ndarray, bary: np.ndarray, tau: np.ndarray) -> np.ndarray:
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    diff = tau[None, :] - nodes[:, None]
    exact = diff == 0.0
    diff[exact] = 1.0
    terms = bary[:, None] / diff
    basis = terms / terms.sum(axis=0)
    hit = exact.any(axis=0)
    if hit.any():
        basis[:, hit] = exact[:, hit].astype(float)
    return basis


def lagrange_interpolate(grid: SdcGrid, values, t):
    """Barycentric (second form) interpolation of nodal ``values`` at ``t``.

    ``values`` may carry trailing dimensions; the first axis runs over nodes.
    """
    values = np.asarray(values)
    scalar = np.ndim(t) == 0
    basis = _lagrange_basis(grid.nodes, grid.bary, t)
    out = np.tensordot(basis, values, axes=([0], [0]))
    return out[0] if scalar else out
