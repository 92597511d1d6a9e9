"""High-order IMEX time integration: IMEX Euler/BDF2, IMEX Runge-Kutta and SISDC."""
from .integrators import (
    Bdf2History,
    SplitSystem,
    bdf2_step,
    imex_euler_step,
    imex_rk_step_const,
    imex_rk_step_var,
)
from .kernels import BACKEND
from .quadrature import SdcGrid, gll_nodes, lagrange_interpolate, sdc_weights
from .sdc import SdcConfig, sdc_step, substep_count
from .tableaux import ImexTableau, builtin_tableau, validate_structure

__version__ = "0.1.0"
