"""Energy-adaptive Riemannian conjugate gradient for plane-wave Kohn-Sham-type models."""

from .blocks import BlockArray, Frame, TangentVector
from .eametric import FomConfig, ShiftSpec, build_shift, ea_gradient, ea_inner, fom_solve
from .model import KohnShamModel, PlaneWaveBasis, build_potential
from .solvers import (
    LineSearchParams,
    ScfConfig,
    SolverConfig,
    SolverTrace,
    run_eargd,
    run_earcg,
    run_l2rcg,
    run_scf,
)

__version__ = "0.1.0"

__all__ = [
    "BlockArray", "FomConfig", "Frame", "KohnShamModel", "LineSearchParams", "PlaneWaveBasis",
    "ScfConfig", "ShiftSpec", "SolverConfig", "SolverTrace", "TangentVector", "build_potential",
    "build_shift", "ea_gradient", "ea_inner", "fom_solve", "run_eargd", "run_earcg",
    "run_l2rcg", "run_scf",
]
