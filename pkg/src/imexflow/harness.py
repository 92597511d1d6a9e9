"""Experiment driver: run configurations, convergence sweeps and critical step sizes."""
from __future__ import annotations

import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np

from .flow import FlowState, FlowStepper, brachet_case, cfl_number, tgp_case, vvp_case
from .flow.operators import HelmholtzConvergenceError
from .integrators import Bdf2History, bdf2_step, imex_euler_step, imex_rk_step_var, linear_scalar_system
from .kernels import BACKEND
from .sdc import SdcConfig, parse_sdc_name, sdc_step
from .tableaux import ImexTableau, builtin_tableau

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "load_config",
    "resolve_flow_method",
    "split_methods",
    "rms_error",
    "eoc",
    "RunResult",
    "simulate",
    "write_run",
    "ConvergenceRecord",
    "converge",
    "convergence_csv",
    "CriticalResult",
    "critical_cfl",
    "fmt",
]

CASES = ("tgp", "vvp", "custom", "ode")

_CASE_DEFAULTS = {
    "tgp": dict(grid=64, nu0=0.02, nu1=0.0, t_final=0.25),
    "vvp": dict(grid=24, nu0=0.01, nu1=0.01, t_final=0.25),
    "custom": dict(grid=16, nu0=1.0 / 1600, nu1=0.0, t_final=1.0),
    "ode": dict(grid=1, nu0=0.0, nu1=0.0, t_final=1.0),
}


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """17 significant digits, the CSV float format."""
    return f"{x:.17g}"


@dataclass(frozen=True)
class RunConfig:
    case: str = "tgp"
    method: str = "BDF2"
    dt: float = 2.0**-5
    t_final: Optional[float] = None
    grid: Optional[int] = None
    nu0: Optional[float] = None
    nu1: Optional[float] = None
    sdc_M: int = 3
    sdc_K: int = 5
    predictor: str = "IMEX-Euler"
    seed: int = 0
    # extensions
    lam_c: complex = -1j
    lam_d: complex = -1.0
    instability_factor: float = 10.0
    record_every: int = 1
    noise: float = 0.0

    def resolved(self) -> "RunConfig":
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}; expected one of {', '.join(CASES)}")
        d = _CASE_DEFAULTS[self.case]
        return replace(
            self,
            t_final=d["t_final"] if self.t_final is None else self.t_final,
            grid=d["grid"] if self.grid is None else self.grid,
            nu0=d["nu0"] if self.nu0 is None else self.nu0,
            nu1=d["nu1"] if self.nu1 is None else self.nu1,
        )

    def items(self):
        for f in fields(self):
            yield f.name, getattr(self, f.name)


_COMMENT = re.compile(r"\s*#.*$")


def _convert(key: str, raw: str, proto):
    ftype = {f.name: f.type for f in fields(RunConfig)}[key]
    raw = raw.strip()
    try:
        if "complex" in str(ftype):
            return complex(raw.replace(" ", ""))
        if "int" in str(ftype):
            return int(raw)
        if "float" in str(ftype):
            return float(_eval_pow2(raw))
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def _eval_pow2(raw: str) -> float:
    m = re.fullmatch(r"2\^(-?\d+)", raw.replace(" ", ""))
    return 2.0 ** int(m.group(1)) if m else float(raw)


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = _COMMENT.sub("", line).strip()
        if not line:
            continue
        m = re.fullmatch(r"([A-Za-z_]\w*)\s*[=:]\s*(.*)", line)
        if not m:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = m.group(1), m.group(2)
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw, RunConfig)
    return RunConfig(**values).resolved()


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def split_methods(spec: str) -> list[str]:
    """Split a comma/semicolon/space separated method list, keeping ``SDC-Eu(3,5)`` intact."""
    out, buf, depth = [], "", 0
    for ch in spec:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in ",; \t":
            if buf:
                out.append(buf)
            buf = ""
        else:
            buf += ch
    if buf:
        out.append(buf)
    return out


def resolve_flow_method(name: str, cfg: Optional[RunConfig] = None):
    """Method name -> "BDF2", an ImexTableau or an SdcConfig."""
    if name.upper() == "BDF2":
        return "BDF2"
    if name.upper() == "SDC":
        if cfg is None:
            raise ConfigError("bare 'SDC' needs sdc_M, sdc_K and predictor")
        return SdcConfig(cfg.sdc_M, cfg.sdc_K, cfg.predictor)
    if name.startswith("SDC-"):
        try:
            return parse_sdc_name(name)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        return builtin_tableau(name)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc


def method_name(method) -> str:
    return method if isinstance(method, str) else method.name


# -- error measures ------------------------------------------------------------
def rms_error(numeric, exact) -> float:
    a = np.asarray(numeric)
    b = np.asarray(exact)
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean(np.abs(a - b) ** 2)))


def eoc(e1: float, e2: float, dt1: float, dt2: float) -> float:
    """ln(e1/e2) / ln(dt1/dt2); NaN when either error is zero or not finite."""
    if dt1 <= 0 or dt2 <= 0 or dt1 == dt2:
        raise ValueError("step sizes must be positive and distinct")
    if not (e1 > 0 and e2 > 0 and math.isfinite(e1) and math.isfinite(e2)):
        return float("nan")
    return math.log(e1 / e2) / math.log(dt1 / dt2)


# -- single runs ---------------------------------------------------------------
@dataclass
class RunResult:
    config: RunConfig
    eps_v: float
    twall_s: float
    unstable: bool
    steps: int
    t_end: float
    history: list = field(default_factory=list)  # (t, rms_error_v, divergence_max)
    max_divergence: float = 0.0
    stats: dict = field(default_factory=dict)
    cfl: float = float("nan")
    note: str = ""


def _nsteps(t_final: float, dt: float, exact: bool) -> int:
    n = t_final / dt
    k = int(round(n))
    if exact:
        if k < 1 or abs(n - k) > 1e-12 * max(n, 1.0):
            raise ConfigError(f"t_final={t_final} is not a multiple of dt={dt}")
        return k
    return max(int(math.ceil(n - 1e-12)), 1)


def _flow_case(cfg: RunConfig):
    if cfg.case == "tgp":
        return tgp_case(cfg.grid, cfg.nu0)
    if cfg.case == "vvp":
        return vvp_case(cfg.grid, cfg.nu0, cfg.nu1)
    case = brachet_case(cfg.grid, cfg.nu0)
    if cfg.noise > 0:
        rng = np.random.default_rng(cfg.seed)
        pert = case.ns.project(case.ns.to_spectral(rng.standard_normal(case.initial.shape)))[0]
        case.initial = case.initial + cfg.noise * case.ns.to_physical(pert)
    return case


def _simulate_flow(cfg: RunConfig, exact_steps: bool) -> RunResult:
    case = _flow_case(cfg)
    ns = case.ns
    method = resolve_flow_method(cfg.method, cfg)
    stepper = FlowStepper(ns, method, cfg.dt)
    state = FlowState(case.initial_spectral(), 0.0)
    n = _nsteps(cfg.t_final, cfg.dt, exact_steps)
    limit = cfg.instability_factor * case.v_ref
    history, twall, unstable, note = [], 0.0, False, ""
    max_div = 0.0
    err = float("nan")
    steps = 0
    for i in range(1, n + 1):
        ns.stats.max_divergence = 0.0
        t0 = time.perf_counter()
        try:
            state = stepper.step(state)
        except HelmholtzConvergenceError as exc:
            unstable, note = True, str(exc)
            break
        twall += time.perf_counter() - t0
        steps = i
        # projections inside the step and the velocity it returns
        step_div = max(ns.stats.max_divergence, ns.grid.relative_divergence(state.v))
        max_div = max(max_div, step_div)
        v = ns.to_physical(state.v)
        speed = float(np.sqrt(np.max(np.sum(v * v, axis=0))))
        if not np.isfinite(speed) or speed > limit:
            unstable = True
            note = f"velocity magnitude {speed:.3e} exceeded {limit:.3e} at t={state.t:.6g}"
        if case.exact is not None and (unstable or i == n or i % cfg.record_every == 0):
            err = rms_error(v, case.exact(state.t))
        if i == n or unstable or i % cfg.record_every == 0:
            history.append((state.t, err if case.exact is not None else float("nan"), step_div))
        if unstable:
            break
    stats = ns.stats.as_dict()
    stats["max_divergence"] = max_div
    return RunResult(cfg, err, twall, unstable, steps, state.t, history, max_div, stats,
                     cfl_number(ns.grid, cfg.dt, case.v_ref), note)


class _OdeRunner:
    def __init__(self, cfg: RunConfig):
        self.sys = linear_scalar_system(cfg.lam_c, cfg.lam_d)
        self.method = resolve_flow_method(cfg.method, cfg)
        self.hist = None

    def step(self, u, t, dt):
        m = self.method
        if m == "BDF2":
            if self.hist is None:
                self.hist = Bdf2History.start(u, t)
            return bdf2_step(self.sys, self.hist, dt)
        if isinstance(m, SdcConfig):
            return sdc_step(self.sys, m, u, t, dt)
        if m.name == "IMEX-Euler":
            return imex_euler_step(self.sys, u, t, dt)
        return imex_rk_step_var(self.sys, m, u, t, dt)


def _simulate_ode(cfg: RunConfig, exact_steps: bool) -> RunResult:
    runner = _OdeRunner(cfg)
    lam = cfg.lam_c + cfg.lam_d
    u, t = 1.0 + 0j, 0.0
    n = _nsteps(cfg.t_final, cfg.dt, exact_steps)
    limit = cfg.instability_factor
    history, twall, unstable, err, steps = [], 0.0, False, float("nan"), 0
    note = ""
    for i in range(1, n + 1):
        t0 = time.perf_counter()
        u = runner.step(u, t, cfg.dt)
        twall += time.perf_counter() - t0
        t = i * cfg.dt
        steps = i
        if not np.isfinite(abs(u)) or abs(u) > limit:
            unstable = True
            note = f"|u| = {abs(u):.3e} exceeded {limit:.3e} at t={t:.6g}"
        if unstable or i == n or i % cfg.record_every == 0:
            err = abs(u - np.exp(lam * t))
            history.append((t, err, 0.0))
        if unstable:
            break
    return RunResult(cfg, err, twall, unstable, steps, t, history, 0.0, {}, float("nan"), note)


def simulate(cfg: RunConfig, exact_steps: bool = True) -> RunResult:
    """Run one configuration to ``t_final``; only the stepping is timed."""
    cfg = cfg.resolved()
    if cfg.dt <= 0:
        raise ConfigError("dt must be positive")
    if cfg.case == "ode":
        return _simulate_ode(cfg, exact_steps)
    return _simulate_flow(cfg, exact_steps)


def write_run(result: RunResult, outdir) -> None:
    """Write ``meta.txt`` and ``errors.csv`` for one run."""
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "errors.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,rms_error_v,divergence_max\n")
        for t, e, d in result.history:
            fh.write(f"{fmt(t)},{fmt(e)},{fmt(d)}\n")
    lines = [f"{k} = {v}" for k, v in result.config.items()]
    lines += [
        f"steps = {result.steps}",
        f"t_end = {fmt(result.t_end)}",
        f"eps_v = {fmt(result.eps_v)}",
        f"unstable = {result.unstable}",
        f"wall_time_s = {result.twall_s:.6f}",
        f"cfl = {fmt(result.cfl)}",
        "cfl_eigenvalue = pi * max(N/L) of the Fourier derivative",
        f"kernel_backend = {BACKEND}",
    ]
    lines += [f"solver.{k} = {v}" for k, v in result.stats.items()]
    if result.note:
        lines.append(f"note = {result.note}")
    with open(os.path.join(outdir, "meta.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# -- convergence sweeps --------------------------------------------------------
@dataclass
class ConvergenceRecord:
    method: str
    dt: float
    eps_v: float
    eoc: float
    twall_s: float
    unstable: bool = False
    max_divergence: float = 0.0


def _run_task(cfg: RunConfig) -> RunResult:
    return simulate(cfg)


def converge(cfg: RunConfig, methods: Sequence[str], dts: Sequence[float], jobs: int = 1,
             outdir: Optional[str] = None) -> list[ConvergenceRecord]:
    """Run every (method, dt) pair and chain EOCs over stable runs.

    Rows are grouped by method in the given order, with decreasing dt.
    """
    cfg = cfg.resolved()
    dts = sorted({float(d) for d in dts}, reverse=True)
    for d in dts:
        _nsteps(cfg.t_final, d, True)
    for m in methods:
        resolve_flow_method(m, cfg)
    tasks = [replace(cfg, method=m, dt=d) for m in methods for d in dts]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    records = []
    for m in methods:
        prev = None
        for res in (r for r in results if r.config.method == m):
            rate = float("nan")
            if not res.unstable and prev is not None:
                rate = eoc(prev.eps_v, res.eps_v, prev.config.dt, res.config.dt)
            records.append(ConvergenceRecord(m, res.config.dt, res.eps_v, rate, res.twall_s,
                                             res.unstable, res.max_divergence))
            if not res.unstable:
                prev = res
            if outdir is not None:
                tag = re.sub(r"[^A-Za-z0-9_.-]+", "_", m).strip("_")
                write_run(res, os.path.join(outdir, f"{tag}_dt{res.config.dt:.6g}"))
    return records


def convergence_csv(records: Sequence[ConvergenceRecord]) -> str:
    lines = ["method,dt,eps_v,eoc,twall_s"]
    for r in records:
        eps = "nan" if r.unstable else fmt(r.eps_v)
        lines.append(f"{r.method},{fmt(r.dt)},{eps},{fmt(r.eoc)},{fmt(r.twall_s)}")
    return "\n".join(lines) + "\n"


# -- critical step size --------------------------------------------------------
@dataclass
class CriticalResult:
    method: str
    dt_star: float
    dt_unstable: float
    cfl: float
    evaluations: int


def critical_cfl(cfg: RunConfig, method: str, bracket: tuple[float, float],
                 rtol: float = 0.02) -> CriticalResult:
    """Bisect the largest stable step between a stable and an unstable step size.

    Stability is judged over ``cfg.t_final`` with the run instability criterion.
    The returned step is stable and ``dt_unstable <= (1 + rtol) * dt_star``.
    """
    cfg = replace(cfg.resolved(), method=method, record_every=10**9)

    def stable(dt):
        return not simulate(replace(cfg, dt=dt), exact_steps=False).unstable

    a, b = sorted(float(x) for x in bracket)
    sa, sb = stable(a), stable(b)
    evals = 2
    if sa == sb:
        state = "stable" if sa else "unstable"
        raise ValueError(f"bracket [{a}, {b}] is {state} at both ends")
    if not sa:
        raise ValueError(f"bracket [{a}, {b}] is unstable at the small step and stable at the large one")
    lo, hi = a, b
    while hi > (1.0 + rtol) * lo:
        mid = 0.5 * (lo + hi)
        evals += 1
        if stable(mid):
            lo = mid
        else:
            hi = mid
    if cfg.case == "ode":
        cfl = float("nan")
    else:
        case = _flow_case(cfg)
        cfl = cfl_number(case.ns.grid, lo, case.v_ref)
    return CriticalResult(method, lo, hi, cfl, evals)
