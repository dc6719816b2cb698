from .cg import CG_VARIANTS, beta_fr, beta_hybrid, beta_prp, compute_beta
from .linesearch import (
    LS_FAIL,
    LS_OK,
    LineSearchParams,
    LineSearchResult,
    LinePoint,
    approx_wolfe_ok,
    secant_linesearch,
)
from .rcg import (
    CGState,
    EnergyAdaptiveGradient,
    L2Gradient,
    SolverConfig,
    run_eargd,
    run_earcg,
    run_l2rcg,
    run_rcg_generic,
)
from .scf import ScfConfig, aufbau_frame, run_scf
from .state import PointState, evaluate_point
from .trace import (
    CONVERGED,
    LINESEARCH_FAIL,
    MAX_ITERS,
    STAGNATION,
    STATUSES,
    IterRecord,
    SolverTrace,
)

__all__ = [
    "CGState", "CG_VARIANTS", "CONVERGED", "EnergyAdaptiveGradient", "IterRecord",
    "L2Gradient", "LINESEARCH_FAIL", "LS_FAIL", "LS_OK", "LinePoint", "LineSearchParams",
    "LineSearchResult", "MAX_ITERS", "PointState", "STAGNATION", "STATUSES", "ScfConfig",
    "SolverConfig", "SolverTrace", "approx_wolfe_ok", "aufbau_frame", "beta_fr",
    "beta_hybrid", "beta_prp", "compute_beta", "evaluate_point", "run_eargd", "run_earcg",
    "run_l2rcg", "run_rcg_generic", "run_scf", "secant_linesearch",
]
