"""Evaluated iterate: density, Hamiltonian, residual and energy at one frame."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blocks import BlockArray, Frame
from ..model.ks import DensityField, Hamiltonian, KohnShamModel


@dataclass
class PointState:
    phi: Frame
    rho: DensityField
    ham: Hamiltonian
    hphi: BlockArray
    res: BlockArray
    lam: list[np.ndarray]
    energy: float

    @property
    def res_norm(self) -> float:
        return self.res.norm()


def evaluate_point(model: KohnShamModel, phi: Frame) -> PointState:
    """One density evaluation and one Hamiltonian application."""
    rho = model.density(phi)
    ham = model.hamiltonian_for_density(rho)
    res, lam, hphi = model.residual(phi, ham.apply(phi))
    energy = model.energy_terms(phi, rho)["total"]
    return PointState(phi, rho, ham, hphi, res, lam, energy)
