"""Periodic incompressible Navier-Stokes solver with IMEX time stepping."""
from .cases import (
    FlowCase,
    brachet_case,
    brachet_initial,
    momentum_residual,
    tg_decay_exact,
    tg_exact,
    tgp_case,
    vv_exact,
    vv_forcing,
    vv_gradient,
    vv_viscosity,
    vvp_case,
)
from .operators import (
    HelmholtzConvergenceError,
    NavierStokes,
    SolverStats,
    Tendencies,
    ViscosityModel,
    cfl_number,
)
from .spectral import SpectralGrid
from .steppers import (
    FlowBdf2History,
    FlowState,
    FlowStepper,
    InstabilityError,
    bdf2_flow_step,
    euler_flow_step,
    rk_flow_step,
    sdc_flow_step,
)

__all__ = [name for name in dir() if not name.startswith("_")]
