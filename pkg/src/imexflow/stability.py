"""Linear stability and accuracy of IMEX one-step methods.

Every method is applied once, with unit step, to the scalar problem
u' = lam_im u + lam_ex u, u(0) = 1. The result is the amplification factor
R(z) and the error R(z) - exp(z), z = lam_im + lam_ex.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from . import _kernels_py, kernels
from .quadrature import gll_nodes, sdc_weights
from .sdc import SdcConfig, parse_sdc_name, substep_count
from .tableaux import ImexTableau, builtin_tableau

__all__ = [
    "SplitMode",
    "PoleError",
    "resolve_method",
    "method_label",
    "amplification",
    "eval_R",
    "scaled_argument",
    "substeps",
    "DomainScan",
    "scan_domain",
    "critical_imag",
    "CriticalMatch",
    "REFERENCE_CRITICAL_IMAG",
    "match_reference",
    "OrderFit",
    "consistency_order",
]

# Critical imaginary values at Re z = -0.1 for the model problem (published reference).
REFERENCE_CRITICAL_IMAG = {
    "RK-CB2": 1.18,
    "RK-CB3e": 2.90,
    "RK-ARS3": 1.73,
    "SDC-Eu(3,5)": 2.68,
    "SDC-CB3e(3,3)": 4.20,
    "SDC-ARS3(3,3)": 2.99,
}


class PoleError(ZeroDivisionError):
    """An implicit stage is singular at the requested z."""


class SplitMode(enum.Enum):
    IMPLICIT = "implicit"
    EXPLICIT = "explicit"
    SEMI_IMPLICIT = "semi_implicit"

    @classmethod
    def parse(cls, value) -> "SplitMode":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "_")
        for mode in cls:
            if mode.value == key:
                return mode
        raise ValueError(f"unknown split mode {value!r}")

    def split(self, z):
        """(z_im, z_ex) for the given total z (scalar or array)."""
        if self is SplitMode.IMPLICIT:
            return z, 0 * z
        if self is SplitMode.EXPLICIT:
            return 0 * z, z
        re = z.real
        return re + 0j * re, 1j * z.imag


def resolve_method(method) -> ImexTableau | SdcConfig:
    if isinstance(method, (ImexTableau, SdcConfig)):
        return method
    name = str(method)
    if name.upper() == "BDF2":
        raise ValueError("BDF2 is a two-step method; its stability function is not defined here")
    if name.startswith("SDC-"):
        return parse_sdc_name(name)
    return builtin_tableau(name)


def method_label(method) -> str:
    m = resolve_method(method)
    return m.name


def substeps(method) -> int:
    """Number of nontrivial substeps used for the argument scaling."""
    m = resolve_method(method)
    if isinstance(m, SdcConfig):
        return substep_count(m)
    return max(m.s - 1, 1)


def scaled_argument(method, z):
    return z / substeps(method)


def _sdc_data(cfg: SdcConfig):
    grid = gll_nodes(cfg.M, 0.0, 1.0)
    return grid.lengths, sdc_weights(grid)


def amplification(method, z, mode=SplitMode.SEMI_IMPLICIT) -> np.ndarray:
    """R(z) on an array of z; singular points come back as NaN."""
    m = resolve_method(method)
    mode = SplitMode.parse(mode)
    z = np.asarray(z, dtype=complex)
    zi, ze = mode.split(z)
    if isinstance(m, SdcConfig):
        tab = m.tableau
        dts, w = _sdc_data(m)
        return kernels.sdc_amplification(zi, ze, dts, w, m.K, tab.a_im, tab.a_ex, tab.b_im, tab.b_ex)
    return kernels.rk_amplification(zi, ze, m.a_im, m.a_ex, m.b_im, m.b_ex)


def eval_R(method, z: complex, mode=SplitMode.SEMI_IMPLICIT):
    """Return (R(z), R(z) - exp(z)) for a single z."""
    R = complex(amplification(method, np.array([z]), mode)[0])
    if math.isnan(R.real):
        raise PoleError(f"singular implicit stage for {method_label(method)} at z={z}")
    return R, R - complex(np.exp(z))


# -- extended precision ---------------------------------------------------------

def _mp_matrix(rows):
    return [[mp.mpf(v.numerator) / v.denominator for v in row] for row in rows]


def _mp_vector(vals):
    return [mp.mpf(v.numerator) / v.denominator for v in vals]


def _mp_tableau(tab: ImexTableau):
    ex = tab.exact
    return _mp_matrix(ex["a_im"]), _mp_matrix(ex["a_ex"]), _mp_vector(ex["b_im"]), _mp_vector(ex["b_ex"])


def _mp_sdc_data(M: int):
    x = [mp.mpf(v) for v in gll_nodes(M, -1.0, 1.0).nodes]
    # Newton polish of the interior Lobatto points: roots of P'_M
    for i in range(1, M):
        for _ in range(50):
            f = mp.diff(lambda s: mp.legendre(M, s), x[i])
            d = mp.diff(lambda s: mp.legendre(M, s), x[i], 2)
            step = f / d
            x[i] -= step
            if abs(step) < mp.mpf(10) ** (-mp.mp.dps + 5):
                break
    t = [(xi + 1) / 2 for xi in x]
    dts = [t[m + 1] - t[m] for m in range(M)]
    w = [[None] * M for _ in range(M + 1)]
    for q in range(M + 1):
        # coefficients of the Lagrange basis polynomial, highest degree first
        coeffs = [mp.mpf(1)]
        denom = mp.mpf(1)
        for j in range(M + 1):
            if j == q:
                continue
            coeffs = [a - t[j] * b for a, b in zip(coeffs + [0], [0] + coeffs)]
            denom *= t[q] - t[j]
        deg = len(coeffs) - 1
        integral = [c / (deg - k + 1) for k, c in enumerate(coeffs)]

        def prim(s):
            return sum(c * s ** (deg - k + 1) for k, c in enumerate(integral))

        for m in range(M):
            w[q][m] = (prim(t[m + 1]) - prim(t[m])) / denom
    return dts, w


def eval_R_mp(method, z, mode=SplitMode.SEMI_IMPLICIT, dps: int = 40):
    """Extended-precision (R, eps) using the exact tableau coefficients."""
    m = resolve_method(method)
    mode = SplitMode.parse(mode)
    with mp.workdps(dps):
        z = mp.mpc(z)
        if mode is SplitMode.IMPLICIT:
            zi, ze = z, mp.mpc(0)
        elif mode is SplitMode.EXPLICIT:
            zi, ze = mp.mpc(0), z
        else:
            zi, ze = mp.mpc(z.real), mp.mpc(0, z.imag)
        if isinstance(m, SdcConfig):
            a_im, a_ex, b_im, b_ex = _mp_tableau(m.tableau)
            dts, w = _mp_sdc_data(m.M)
            R = _kernels_py.sdc_point(zi, ze, dts, w, m.K, a_im, a_ex, b_im, b_ex)
        else:
            a_im, a_ex, b_im, b_ex = _mp_tableau(m)
            R = _kernels_py.rk_point(zi, ze, a_im, a_ex, b_im, b_ex, mp.mpf(1), mp.mpf(1))
        return R, R - mp.exp(z)


# -- domains --------------------------------------------------------------------

@dataclass
class DomainScan:
    """|R| and |eps| on a lattice; ``re``/``im`` are the reported axes (z_s if scaled)."""

    method: str
    mode: SplitMode
    re: np.ndarray
    im: np.ndarray
    absR: np.ndarray
    absErr: np.ndarray
    scaled: bool
    scale: int
    poles: np.ndarray = field(default=None)

    def rows(self):
        """Row-major (im outer, re inner) tuples ``(re, im, |R|, |eps|)``."""
        for j, y in enumerate(self.im):
            for i, x in enumerate(self.re):
                yield x, y, self.absR[j, i], self.absErr[j, i]

    def to_csv(self) -> str:
        lines = ["re,im,absR,absErr"]
        for x, y, r, e in self.rows():
            lines.append(f"{x:.17g},{y:.17g},{r:.17g},{e:.17g}")
        return "\n".join(lines) + "\n"

    def metadata(self) -> dict:
        return {
            "method": self.method,
            "mode": self.mode.value,
            "scaled": self.scaled,
            "scale_divisor": self.scale,
            "axes": "z_s = z / substeps" if self.scaled else "z",
            "poles": int(np.count_nonzero(self.poles)),
            "backend": kernels.BACKEND,
        }


def scan_domain(method, mode, re_range, im_range, nx: int, ny: int, scaled: bool = False) -> DomainScan:
    if nx < 2 or ny < 2:
        raise ValueError("grid resolutions must be >= 2")
    mode = SplitMode.parse(mode)
    re = np.linspace(re_range[0], re_range[1], nx)
    im = np.linspace(im_range[0], im_range[1], ny)
    n = substeps(method) if scaled else 1
    Z = (re[None, :] + 1j * im[:, None]) * n
    R = amplification(method, Z, mode)
    poles = np.isnan(R)
    err = R - np.exp(Z)
    return DomainScan(method_label(method), mode, re, im, np.abs(R), np.abs(err), scaled, n, poles)


def critical_imag(method, mode=SplitMode.SEMI_IMPLICIT, re_part: float = -0.1,
                  scaled: bool = False, tol: float = 1e-4, y_max: float = 1e3) -> float:
    """Smallest y > 0 with |R(re_part + i y)| = 1.

    The crossing is bracketed by doubling from y = 0.01 and then bisected to
    ``tol``. With ``scaled`` the search runs in z_s, i.e. R is evaluated at
    substeps * (re_part + i y). Returns ``inf`` if no crossing below ``y_max``.
    """
    n = substeps(method) if scaled else 1
    mode = SplitMode.parse(mode)

    def absR(y):
        R = amplification(method, np.array([n * complex(re_part, y)]), mode)[0]
        return abs(R) if not np.isnan(R) else np.inf

    if absR(0.0) > 1.0 + 1e-12:
        raise ValueError(f"|R({re_part})| > 1: no stable interval on the real axis")
    lo, hi = 0.0, 0.01
    while absR(hi) < 1.0:
        lo, hi = hi, 2 * hi
        if hi > y_max:
            return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if absR(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class CriticalMatch:
    method: str
    re_part: float
    y_raw: float
    y_scaled: float
    reference: float | None
    rel_raw: float
    rel_scaled: float

    @property
    def interpretation(self) -> str:
        if self.reference is None:
            return "no reference"
        hits = [name for name, rel in (("raw z", self.rel_raw), ("scaled z_s", self.rel_scaled)) if rel <= 0.02]
        return " and ".join(hits) if hits else "neither"


def match_reference(method, re_part: float = -0.1) -> CriticalMatch:
    """Critical value under both argument interpretations, compared to the reference."""
    label = method_label(method)
    y_raw = critical_imag(method, SplitMode.SEMI_IMPLICIT, re_part, scaled=False)
    y_sc = critical_imag(method, SplitMode.SEMI_IMPLICIT, re_part, scaled=True)
    ref = REFERENCE_CRITICAL_IMAG.get(label)
    rel = (lambda y: abs(y - ref) / ref) if ref else (lambda y: math.nan)
    return CriticalMatch(label, re_part, y_raw, y_sc, ref, rel(y_raw), rel(y_sc))


# -- consistency order ----------------------------------------------------------

@dataclass
class OrderFit:
    order: float
    slope: float
    residual: float
    radii: np.ndarray
    errors: np.ndarray
    direction: str = "exp(3i*pi/4)"

    @property
    def determinate(self) -> bool:
        return self.residual <= 0.1


def consistency_order(method, mode=SplitMode.SEMI_IMPLICIT, radii=None, dps: int = 40) -> OrderFit:
    """Order estimate from the local error on the scalar problem.

    |eps(r e^{3 i pi / 4})| is fitted against r on 8 log-spaced radii in
    [1e-3, 1e-1]; the slope minus one is the order. Evaluation is carried out
    in ``dps``-digit arithmetic so that the smallest radii are not swamped by
    double-precision round-off. ``residual`` is the largest deviation from
    the fitted line in log10(|eps|).
    """
    radii = np.logspace(-1, -3, 8) if radii is None else np.asarray(radii)
    errs = []
    with mp.workdps(dps):
        direction = mp.expjpi(mp.mpf(3) / 4)
        for r in radii:
            _, eps = eval_R_mp(method, mp.mpf(r) * direction, mode, dps)
            errs.append(float(abs(eps)))
    errs = np.array(errs)
    x, y = np.log10(radii), np.log10(errs)
    slope, icpt = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + icpt))))
    return OrderFit(slope - 1.0, slope, residual, radii, errs)
