"""Butcher tableaux of the paired DIRK/ERK (IMEX Runge-Kutta) methods."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction as Fr

import numpy as np

__all__ = [
    "ImexTableau",
    "ValidationReport",
    "TABLEAU_NAMES",
    "builtin_tableau",
    "validate_structure",
    "tableau_csv",
]


@dataclass(frozen=True)
class ImexTableau:
    """Implicit and explicit tableaux sharing the node vector ``c``.

    Coefficients are kept as exact fractions in ``exact`` and as float64
    arrays for computation. ``declared_flags`` holds the structural
    properties as published for the method (stiffly accurate, FSAL, shared
    weights); :func:`validate_structure` recomputes them from the
    coefficients.
    """

    name: str
    c: np.ndarray
    a_im: np.ndarray
    a_ex: np.ndarray
    b_im: np.ndarray
    b_ex: np.ndarray
    declared_order: int
    declared_flags: dict = field(default_factory=dict)
    exact: dict = field(default_factory=dict, repr=False)

    @property
    def s(self) -> int:
        return len(self.c)

    @property
    def stiffly_accurate(self) -> bool:
        return bool(np.array_equal(self.a_im[-1], self.b_im))

    @property
    def fsal(self) -> bool:
        return bool(np.array_equal(self.a_ex[-1], self.b_ex)) and self.c[-1] == 1.0

    @property
    def shared_b(self) -> bool:
        return bool(np.array_equal(self.b_im, self.b_ex))

    @property
    def gsa(self) -> bool:
        return self.stiffly_accurate and self.fsal

    @property
    def flags(self) -> dict:
        return {
            "stiffly_accurate": self.stiffly_accurate,
            "fsal": self.fsal,
            "gsa": self.gsa,
            "shared_b": self.shared_b,
        }

    def perturbed(self, which: str, i: int, j: int | None, delta: float) -> "ImexTableau":
        """Copy with one float coefficient shifted by ``delta`` (exact data dropped)."""
        arrays = {k: getattr(self, k).copy() for k in ("c", "a_im", "a_ex", "b_im", "b_ex")}
        if j is None:
            arrays[which][i] += delta
        else:
            arrays[which][i, j] += delta
        return ImexTableau(
            name=self.name + "*",
            declared_order=self.declared_order,
            declared_flags=dict(self.declared_flags),
            **arrays,
        )


def _tab(name, order, c, a_im, a_ex, b_im, b_ex, sa, fsal, shared_b) -> ImexTableau:
    s = len(c)

    def square(rows):
        out = [[Fr(0)] * s for _ in range(s)]
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                out[i][j] = Fr(v)
        return out

    exact = {
        "c": [Fr(v) for v in c],
        "a_im": square(a_im),
        "a_ex": square(a_ex),
        "b_im": [Fr(v) for v in b_im],
        "b_ex": [Fr(v) for v in b_ex],
    }
    arr = {k: np.array(v, dtype=float) for k, v in exact.items()}
    return ImexTableau(
        name=name,
        declared_order=order,
        declared_flags={
            "stiffly_accurate": sa,
            "fsal": fsal,
            "gsa": sa and fsal,
            "shared_b": shared_b,
        },
        exact=exact,
        **arr,
    )


def _imex_euler():
    return _tab(
        "IMEX-Euler", 1,
        c=[0, 1],
        a_im=[[0], [0, 1]],
        a_ex=[[0], [1, 0]],
        b_im=[0, 1],
        b_ex=[1, 0],
        sa=True, fsal=True, shared_b=False,
    )


def _rk_tr():
    h = Fr(1, 2)
    return _tab(
        "RK-TR", 2,
        c=[0, 1, 1],
        a_im=[[0], [0, 1], [h, 0, h]],
        a_ex=[[0], [1], [h, h]],
        b_im=[h, 0, h],
        b_ex=[h, h, 0],
        sa=True, fsal=True, shared_b=False,
    )


def _rk_cb2():
    b = [0, Fr(5, 6), Fr(1, 6)]
    return _tab(
        "RK-CB2", 2,
        c=[0, Fr(2, 5), 1],
        a_im=[[0], [0, Fr(2, 5)], b],
        a_ex=[[0], [Fr(2, 5)], [0, 1]],
        b_im=b,
        b_ex=b,
        sa=True, fsal=False, shared_b=True,
    )


def _rk_cb3c():
    # Entries (4,3) of the two tableaux are the corrected ones; the original
    # publication has them swapped.
    c2 = Fr(3375509829940, 4525919076317)
    c3 = Fr(272778623835, 1039454778728)
    b = [0, Fr(673488652607, 2334033219546), Fr(493801219040, 853653026979),
         Fr(184814777513, 1389668723319)]
    return _tab(
        "RK-CB3c", 3,
        c=[0, c2, c3, 1],
        a_im=[
            [0],
            [0, c2],
            [0, Fr(-11712383888607531889907, 32694570495602105556248),
             Fr(566138307881, 912153721139)],
            b,
        ],
        a_ex=[
            [0],
            [c2],
            [0, c3],
            [0, Fr(673488652607, 2334033219546), Fr(1660544566939, 2334033219546)],
        ],
        b_im=b,
        b_ex=b,
        sa=False, fsal=False, shared_b=True,
    )


def _rk_cb3e():
    b = [0, Fr(3, 4), Fr(-1, 4), Fr(1, 2)]
    return _tab(
        "RK-CB3e", 3,
        c=[0, Fr(1, 3), 1, 1],
        a_im=[[0], [0, Fr(1, 3)], [0, Fr(1, 2), Fr(1, 2)], b],
        a_ex=[[0], [Fr(1, 3)], [0, 1], [0, Fr(3, 4), Fr(1, 4)]],
        b_im=b,
        b_ex=b,
        sa=True, fsal=False, shared_b=True,
    )


def _rk_cb4():
    a1 = Fr(232049084587, 1377130630063)
    a2 = Fr(322009889509, 2243393849156)
    b = [a1, a2, Fr(-195109672787, 1233165545817), Fr(-340582416761, 705418832319),
         Fr(463396075661, 409972144477), Fr(323177943294, 1626646580633)]
    return _tab(
        "RK-CB4", 4,
        c=[0, Fr(1, 4), Fr(3, 4), Fr(3, 8), Fr(1, 2), 1],
        a_im=[
            [0],
            [Fr(1, 8), Fr(1, 8)],
            [Fr(216145252607, 961230882893), Fr(257479850128, 1143310606989),
             Fr(30481561667, 101628412017)],
            [a1, Fr(-381180097479, 1276440792700), Fr(-54660926949, 461115766612),
             Fr(344309628413, 552073727558)],
            [a1, a2, Fr(-100836174740, 861952129159), Fr(-250423827953, 1283875864443),
             Fr(1, 2)],
            b,
        ],
        a_ex=[
            [0],
            [Fr(1, 4)],
            [Fr(153985248130, 1004999853329), Fr(902825336800, 1512825644809)],
            [a1, Fr(99316866929, 820744730663), Fr(82888780751, 969573940619)],
            [a1, a2, Fr(57501241309, 765040883867), Fr(76345938311, 676824576433)],
            [a1, a2, Fr(-195109672787, 1233165545817), Fr(-4099309936455, 6310162971841),
             Fr(1395992540491, 933264948679)],
        ],
        b_im=b,
        b_ex=b,
        sa=True, fsal=False, shared_b=True,
    )


def _rk_ars3():
    h = Fr(1, 2)
    b_im = [0, Fr(3, 2), Fr(-3, 2), h, h]
    b_ex = [Fr(1, 4), Fr(7, 4), Fr(3, 4), Fr(-7, 4), 0]
    return _tab(
        "RK-ARS3", 3,
        c=[0, h, Fr(2, 3), h, 1],
        a_im=[[0], [0, h], [0, Fr(1, 6), h], [0, -h, h, h], b_im],
        a_ex=[[0], [h], [Fr(11, 18), Fr(1, 18)], [Fr(5, 6), Fr(-5, 6), h], b_ex[:4]],
        b_im=b_im,
        b_ex=b_ex,
        sa=True, fsal=True, shared_b=False,
    )


_BUILDERS = {
    "IMEX-Euler": _imex_euler,
    "RK-TR": _rk_tr,
    "RK-CB2": _rk_cb2,
    "RK-CB3c": _rk_cb3c,
    "RK-CB3e": _rk_cb3e,
    "RK-CB4": _rk_cb4,
    "RK-ARS3": _rk_ars3,
}
TABLEAU_NAMES = tuple(_BUILDERS)
RK_NAMES = TABLEAU_NAMES[1:]
_CACHE: dict[str, ImexTableau] = {}


def builtin_tableau(name: str) -> ImexTableau:
    """Return the named built-in tableau (cached; instances are immutable)."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown method {name!r}; valid names: {', '.join(TABLEAU_NAMES)}")
    if name not in _CACHE:
        _CACHE[name] = _BUILDERS[name]()
    return _CACHE[name]


@dataclass
class ValidationReport:
    name: str
    checks: dict[str, tuple[bool, float]]
    flags: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(passed for passed, _ in self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, (passed, _) in self.checks.items() if not passed]

    def __str__(self) -> str:
        lines = [f"{self.name}:"]
        for key, (passed, resid) in self.checks.items():
            lines.append(f"  {'ok  ' if passed else 'FAIL'} {key:<24s} {resid:.3e}")
        lines.append("  flags: " + ", ".join(f"{k}={v}" for k, v in self.flags.items()))
        return "\n".join(lines)


def validate_structure(tab: ImexTableau, tol: float = 1e-14) -> ValidationReport:
    """Check the structural identities of an IMEX tableau.

    Every check records (passed, residual). Failures are reported, never raised.
    """
    s = tab.s
    checks: dict[str, tuple[bool, float]] = {}

    def put(key, resid):
        checks[key] = (bool(resid <= tol), float(resid))

    put("row_sum_im", np.max(np.abs(tab.a_im.sum(axis=1) - tab.c)))
    put("row_sum_ex", np.max(np.abs(tab.a_ex.sum(axis=1) - tab.c)))
    put("b_im_sum", abs(tab.b_im.sum() - 1.0))
    put("b_ex_sum", abs(tab.b_ex.sum() - 1.0))
    put("c_first_zero", abs(tab.c[0]))
    put("c_last_one", abs(tab.c[-1] - 1.0))
    put("a_im_lower", np.max(np.abs(np.triu(tab.a_im, 1))) if s > 1 else 0.0)
    put("a_im_first_diag_zero", abs(tab.a_im[0, 0]))
    put("a_ex_strictly_lower", np.max(np.abs(np.triu(tab.a_ex))))

    flags = {
        "stiffly_accurate": float(np.max(np.abs(tab.a_im[-1] - tab.b_im))),
        "fsal": float(max(np.max(np.abs(tab.a_ex[-1] - tab.b_ex)), abs(tab.c[-1] - 1.0))),
        "shared_b": float(np.max(np.abs(tab.b_ex - tab.b_im))),
    }
    flag_values = {k: v <= tol for k, v in flags.items()}
    flag_values["gsa"] = flag_values["stiffly_accurate"] and flag_values["fsal"]
    for key, resid in flags.items():
        checks[f"identity_{key}"] = (True, resid)
    return ValidationReport(tab.name, checks, flag_values)


def tableau_csv(tab: ImexTableau) -> str:
    """CSV dump, one row per stage: ``c | a_im | a_ex`` then the two weight rows."""
    s = tab.s
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "c"] + [f"a_im_{j + 1}" for j in range(s)] + [f"a_ex_{j + 1}" for j in range(s)])
    for i in range(s):
        w.writerow([f"stage_{i + 1}", f"{tab.c[i]:.17g}"]
                   + [f"{v:.17g}" for v in tab.a_im[i]]
                   + [f"{v:.17g}" for v in tab.a_ex[i]])
    w.writerow(["b_im", ""] + [f"{v:.17g}" for v in tab.b_im] + [""] * s)
    w.writerow(["b_ex", ""] + [""] * s + [f"{v:.17g}" for v in tab.b_ex])
    return buf.getvalue()
