"""Acceptance suite: one test per criterion, one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed as each
criterion finishes and again in the terminal summary. ``python
tests/test_acceptance.py`` runs the same checks without pytest.

Criteria 7 and 8 run the flow sweeps (several minutes each). Their records
are shared with criterion 9 and with the error-cost check.
"""
from __future__ import annotations

import math
import os
import sys
import time

import numpy as np
import pytest

from imexflow import SdcConfig, sdc_step
from imexflow.flow.cases import momentum_residual
from imexflow.harness import RunConfig, converge
from imexflow.integrators import linear_scalar_system
from imexflow.stability import SplitMode, consistency_order, eval_R, match_reference
from imexflow.tableaux import RK_NAMES, TABLEAU_NAMES, builtin_tableau, validate_structure

JOBS = os.cpu_count() or 1
MODES = (SplitMode.IMPLICIT, SplitMode.EXPLICIT, SplitMode.SEMI_IMPLICIT)
SDC_METHODS = ("SDC-Eu(3,5)", "SDC-CB3e(3,3)", "SDC-ARS3(3,3)")
THEORY = {
    "BDF2": 2, "RK-TR": 2, "RK-CB2": 2, "RK-CB3c": 3, "RK-CB3e": 3, "RK-ARS3": 3, "RK-CB4": 4,
    "SDC-Eu(3,5)": 6, "SDC-CB3e(3,3)": 6, "SDC-ARS3(3,3)": 6,
}

_RECORDS: dict[str, list] = {}


def _line(num: int, title: str, passed: bool | None, detail: str) -> str:
    tag = "N/A " if passed is None else ("PASS" if passed else "FAIL")
    return f"criterion {num} [{tag}] {title}: {detail}"


@pytest.fixture
def report(record_property, capsys):
    def emit(num, title, passed, detail):
        text = _line(num, title, passed, detail)
        record_property("acceptance", text)
        with capsys.disabled():
            print("\n" + text)
        return passed

    return emit


def _chains(records):
    out = {}
    for r in records:
        out.setdefault(r.method, []).append(r)
    return out


def _pairs(chain):
    """EOCs of consecutive stable runs above the error floor.

    A chain whose finest EOC is below 1 has saturated; its floor is taken as
    the smallest error reached and pairs within a factor 10 of it are dropped.
    """
    stable = [r for r in chain if not r.unstable]
    floor = 0.0
    if len(stable) > 1 and stable[-1].eoc < 1.0:
        floor = 10.0 * min(r.eps_v for r in stable)
    return [b.eoc for a, b in zip(stable, stable[1:]) if a.eps_v > floor and b.eps_v > floor]


def _fmt_chain(chain):
    parts = []
    for r in chain:
        if r.unstable:
            parts.append(f"2^{math.log2(r.dt):.0f}:unstable")
        else:
            parts.append(f"{r.eps_v:.2e}" + ("" if math.isnan(r.eoc) else f"({r.eoc:.2f})"))
    return " ".join(parts)


# -- criteria -------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    problems = []
    worst = 0.0
    for name in TABLEAU_NAMES:
        tab = builtin_tableau(name)
        rep = validate_structure(tab, tol=1e-14)
        worst = max([worst] + [res for k, (_, res) in rep.checks.items() if not k.startswith("identity_")])
        if not rep.ok:
            problems.append(f"{name} residuals {rep.failures}")
        if name in RK_NAMES:
            for key, declared in tab.declared_flags.items():
                if rep.flags.get(key) != declared:
                    problems.append(f"{name} {key}: coefficients {rep.flags.get(key)}, reference {declared}")
    dt = time.perf_counter() - t0
    passed = not problems and dt < 1.0
    detail = f"max residual {worst:.1e}, {dt:.2f}s"
    if problems:
        detail += "; mismatches: " + "; ".join(problems)
    return passed, detail


def criterion_2():
    t0 = time.perf_counter()
    bad, worst = [], 0.0
    cases = [(n, builtin_tableau(n).declared_order, m) for n in RK_NAMES for m in MODES]
    cases.append(("IMEX-Euler", 1, SplitMode.SEMI_IMPLICIT))
    for name, order, mode in cases:
        fit = consistency_order(name, mode)
        worst = max(worst, abs(fit.order - order))
        if abs(fit.order - order) > 0.1:
            bad.append(f"{name}/{mode.value} {fit.order:.3f} (expected {order})")
    dt = time.perf_counter() - t0
    passed = not bad and dt < 5.0
    detail = f"{len(cases)} fits, {dt:.2f}s"
    if bad:
        detail += "; outside +-0.1: " + "; ".join(bad)
    else:
        detail += f"; max deviation {worst:.3f}"
    return passed, detail


def criterion_3():
    t0 = time.perf_counter()
    parts, ok = [], True
    for method in ("RK-CB2", "RK-CB3e", "RK-ARS3") + SDC_METHODS:
        m = match_reference(method)
        best = min(m.rel_raw, m.rel_scaled)
        ok &= best <= 0.02
        parts.append(f"{m.method} raw {m.y_raw:.3f} scaled {m.y_scaled:.3f} "
                     f"ref {m.reference} -> {m.interpretation}")
    dt = time.perf_counter() - t0
    return ok and dt < 30.0, f"{dt:.1f}s; " + "; ".join(parts)


def criterion_4():
    t0 = time.perf_counter()
    vals = {}
    for name in TABLEAU_NAMES:
        tab = builtin_tableau(name)
        if tab.stiffly_accurate:
            vals[name] = abs(eval_R(tab, -1e6, SplitMode.IMPLICIT)[0])
    dt = time.perf_counter() - t0
    passed = bool(vals) and max(vals.values()) <= 1e-4 and dt < 1.0
    return passed, ", ".join(f"{k} {v:.1e}" for k, v in vals.items()) + f"; {dt:.2f}s"


def criterion_5():
    t0 = time.perf_counter()
    cfg = RunConfig(case="ode", t_final=1.0, lam_c=-1j, lam_d=-1.0)
    dts = [2.0 ** -k for k in range(3, 10)]
    chains = _chains(converge(cfg, list(THEORY), dts))
    ok, parts = True, []
    for method, chain in chains.items():
        rates = _pairs(chain)
        rate = rates[-1] if rates else float("nan")
        good = abs(rate - THEORY[method]) <= 0.1
        ok &= good
        parts.append(f"{method} {rate:.2f}" + ("" if good else " (out)"))
    dt = time.perf_counter() - t0
    return ok and dt < 10.0, f"{dt:.1f}s; " + ", ".join(parts)


def _lobatto_iiia(tau):
    """Collocation matrix A[i, j] = int_0^{tau_i} l_j on the nodes ``tau`` in [0, 1]."""
    n = len(tau)
    A = np.zeros((n, n))
    for j in range(n):
        y = np.zeros(n)
        y[j] = 1.0
        P = np.polynomial.Polynomial.fit(tau, y, n - 1, domain=[0, 1], window=[0, 1]).integ()
        A[:, j] = P(tau) - P(0.0)
    return A


def criterion_6():
    t0 = time.perf_counter()
    tau = np.array([0.0, 0.5 - 0.5 / math.sqrt(5.0), 0.5 + 0.5 / math.sqrt(5.0), 1.0])
    A = _lobatto_iiia(tau)
    worst = 0.0
    for lam_c, lam_d, dt in ((-1j, -1.0, 0.5), (-0.5j, -2.0, 0.25), (1j, -0.5, 0.5)):
        lam = lam_c + lam_d
        # u_i = u0 + dt * sum_j A_ij lam u_j on all four nodes
        u_col = np.linalg.solve(np.eye(4) - dt * lam * A, np.ones(4, dtype=complex))
        sys_ = linear_scalar_system(lam_c, lam_d)
        for pred in ("IMEX-Euler", "RK-CB3e", "RK-ARS3"):
            nodes = sdc_step(sys_, SdcConfig(3, 20, pred), 1.0 + 0j, 0.0, dt, return_nodes=True)
            worst = max(worst, float(np.max(np.abs(np.asarray(nodes) - u_col))))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-12 and elapsed < 5.0, f"max nodal deviation {worst:.1e}, {elapsed:.2f}s"


TGP_METHODS = ("BDF2", "RK-TR", "RK-CB2", "RK-CB3c", "RK-CB3e", "RK-ARS3", "RK-CB4") + SDC_METHODS
VVP_METHODS = ("BDF2", "RK-TR", "RK-CB2", "RK-CB3e", "RK-ARS3", "RK-CB4")


def tgp_records():
    if "tgp" not in _RECORDS:
        t0 = time.perf_counter()
        cfg = RunConfig(case="tgp", grid=64, nu0=0.02, nu1=0.0, t_final=0.25)
        recs = converge(cfg, list(TGP_METHODS), [2.0 ** -k for k in range(5, 12)], jobs=JOBS)
        _RECORDS["tgp"] = recs
        _RECORDS["tgp_time"] = time.perf_counter() - t0
    return _RECORDS["tgp"], _RECORDS["tgp_time"]


def vvp_records():
    if "vvp" not in _RECORDS:
        t0 = time.perf_counter()
        # blow-up threshold 1.5 |v|max; the exact field never exceeds |v|max = 2
        cfg = RunConfig(case="vvp", grid=24, nu0=0.01, nu1=0.01, t_final=0.25, instability_factor=1.5)
        recs = converge(cfg, list(VVP_METHODS), [2.0 ** -k for k in range(5, 11)], jobs=JOBS)
        _RECORDS["vvp"] = recs
        _RECORDS["vvp_time"] = time.perf_counter() - t0
    return _RECORDS["vvp"], _RECORDS["vvp_time"]


def criterion_7():
    records, elapsed = tgp_records()
    ok, parts = True, []
    for method, chain in _chains(records).items():
        rates = _pairs(chain)
        if method.startswith("SDC"):
            best = max(rates) if rates else float("nan")
            good = best >= 5.0
            parts.append(f"{method} max EOC {best:.2f}" + ("" if good else " (out)"))
        else:
            rate = rates[-1] if rates else float("nan")
            good = abs(rate - THEORY[method]) <= 0.25
            parts.append(f"{method} {rate:.2f}" + ("" if good else " (out)"))
        ok &= good
    return ok and elapsed < 600.0, f"{elapsed:.0f}s; " + ", ".join(parts)


def criterion_8():
    records, elapsed = vvp_records()
    chains = _chains(records)
    ok, parts = True, []
    for method in ("BDF2", "RK-TR", "RK-CB3e", "RK-ARS3"):
        chain = chains[method]
        rates = _pairs(chain)
        rate = rates[-1] if rates else float("nan")
        good = abs(rate - THEORY[method]) <= 0.25 and not any(r.unstable for r in chain)
        ok &= good
        parts.append(f"{method} {rate:.2f}" + ("" if good else " (out)"))
    cb2 = chains["RK-CB2"]
    blew_up = [r.dt for r in cb2 if r.unstable]
    cb2_ok = any(d >= 2.0 ** -7 for d in blew_up) and all(d > 2.0 ** -8 for d in blew_up)
    ok &= cb2_ok
    if blew_up:
        parts.append("RK-CB2 unstable at dt " + ", ".join(f"2^{math.log2(d):.0f}" for d in blew_up))
    else:
        parts.append(f"RK-CB2 stable at every dt, not reproduced [{_fmt_chain(cb2)}]")
    parts.append(f"RK-CB4 (recorded only) [{_fmt_chain(chains['RK-CB4'])}]")
    return ok and elapsed < 3600.0, f"{elapsed:.0f}s; " + ", ".join(parts)


def criterion_9():
    tgp, _ = tgp_records()
    vvp, _ = vvp_records()
    stable = [r for r in list(tgp) + list(vvp) if not r.unstable]
    worst = max(r.max_divergence for r in stable)
    return worst <= 1e-10, f"max |k.v|/max|v| = {worst:.1e} over {len(stable)} stable runs"


def criterion_10():
    t0 = time.perf_counter()
    res = momentum_residual(32)
    dt = time.perf_counter() - t0
    return res <= 1e-10 and dt < 10.0, f"residual {res:.1e} on 32^3, {dt:.2f}s"


CRITERIA = {
    1: ("tableau fidelity", criterion_1),
    2: ("consistency orders", criterion_2),
    3: ("critical imaginary values", criterion_3),
    4: ("L-stability", criterion_4),
    5: ("model ODE EOC", criterion_5),
    6: ("SDC collocation limit", criterion_6),
    7: ("Taylor-Green periodic sweep", criterion_7),
    8: ("vortex array periodic sweep", criterion_8),
    9: ("divergence invariant", criterion_9),
    10: ("manufactured residual", criterion_10),
}
EXCLUDED = ("wall-bounded order reduction, CFL columns of the critical-value table, "
            "wall-bounded diffusion studies and the DNS results need a wall-resolving "
            "discretization or production-scale runs")


def _check(report, num):
    title, fn = CRITERIA[num]
    passed, detail = fn()
    report(num, title, passed, detail)
    assert passed, detail


def test_criterion_01_tableau_fidelity(report):
    _check(report, 1)


def test_criterion_02_consistency_orders(report):
    _check(report, 2)


def test_criterion_03_critical_imaginary_values(report):
    _check(report, 3)


def test_criterion_04_l_stability(report):
    _check(report, 4)


def test_criterion_05_model_ode_eoc(report):
    _check(report, 5)


def test_criterion_06_sdc_collocation_limit(report):
    _check(report, 6)


@pytest.mark.slow
def test_criterion_07_taylor_green_periodic(report):
    _check(report, 7)


@pytest.mark.slow
def test_criterion_08_vortex_array_periodic(report):
    _check(report, 8)


@pytest.mark.slow
def test_criterion_09_divergence_invariant(report):
    _check(report, 9)


def test_criterion_10_manufactured_residual(report):
    _check(report, 10)


def test_criterion_11_excluded(report):
    report(11, "not reproducible at desk scale", None, "excluded: " + EXCLUDED)


def _wall_time_at(chain, target):
    """Wall time at error ``target``, log-log linear along a stable chain.

    Targets beyond the finest run are extrapolated from the last segment.
    """
    pts = [(r.eps_v, r.twall_s) for r in chain if not r.unstable and r.eps_v > 0]
    segs = list(zip(pts, pts[1:]))
    seg = next(((a, b) for a, b in segs if b[0] <= target <= a[0]), segs[-1])
    (e1, w1), (e2, w2) = seg
    s = math.log(target / e1) / math.log(e2 / e1)
    return math.exp(math.log(w1) + s * (math.log(w2) - math.log(w1)))


@pytest.mark.slow
def test_error_cost_third_order_beats_bdf2():
    chains = _chains(tgp_records()[0])
    w_rk = _wall_time_at(chains["RK-CB3e"], 1e-6)
    w_bdf = _wall_time_at(chains["BDF2"], 1e-6)
    assert w_rk < w_bdf, (w_rk, w_bdf)


if __name__ == "__main__":
    status = 0
    for num, (title, fn) in CRITERIA.items():
        passed, detail = fn()
        print(_line(num, title, passed, detail), flush=True)
        status |= not passed
    print(_line(11, "not reproducible at desk scale", None, "excluded: " + EXCLUDED))
    sys.exit(int(status))
