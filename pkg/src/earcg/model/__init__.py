from .basis import KBlock, PlaneWaveBasis
from .ks import (
    DENSE_SIZE_GUARD,
    DensityField,
    Hamiltonian,
    KohnShamModel,
    OpCounter,
    TPAPreconditioner,
    tpa_precondition,
)
from .potentials import POTENTIALS, build_potential

__all__ = [
    "DENSE_SIZE_GUARD",
    "DensityField",
    "Hamiltonian",
    "KBlock",
    "KohnShamModel",
    "OpCounter",
    "POTENTIALS",
    "PlaneWaveBasis",
    "TPAPreconditioner",
    "build_potential",
    "tpa_precondition",
]
