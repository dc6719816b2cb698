"""Discrete Kohn-Sham-type energy, density and Hamiltonian.

Energy of a frame ``phi`` with K k-blocks (equal weights)::

    E = sum_k 1/2 ||grad phi_k||^2
        + K * ( int v_ion rho + 1/2 int rho v_H(rho) + kappa/2 int rho^2 + c_x int rho^(4/3) )

with the cell density ``rho = 1/K sum_k sum_j |phi_kj|^2`` (so ``int rho = p``).
For K = 1 this is the usual functional; for K > 1 it is the energy of the
K-cell supercell, which keeps ``DE(phi)[w] = Re tr(sum_k (H phi)_k^* w_k)``
exact with the Hamiltonian

    H v = -Laplace v + 2 (v_ion + v_H(rho) + v_xc(rho)) v,   v_xc = kappa rho + 4/3 c_x rho^(1/3).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from ..blocks import BlockArray, Frame
from ..errors import DimensionError, ParameterError, SizeGuardError
from ..matcore import hermitian
from .basis import PlaneWaveBasis

DENSE_SIZE_GUARD = 4096


@dataclass
class OpCounter:
    """Cumulative operator-application counts.

    ``hamiltonian_applies`` increases by one per Hamiltonian call on a block
    array (all k-blocks at once); ``columns_applied`` counts the columns
    touched, so ``columns_applied / p`` is the per-band normalized count.
    """

    hamiltonian_applies: int = 0
    columns_applied: int = 0
    fft_count: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, columns: int, ffts: int):
        with self._lock:
            self.hamiltonian_applies += 1
            self.columns_applied += columns
            self.fft_count += ffts

    def record_ffts(self, ffts: int):
        with self._lock:
            self.fft_count += ffts

    def snapshot(self) -> tuple[int, int, int]:
        return self.hamiltonian_applies, self.columns_applied, self.fft_count


@dataclass(frozen=True)
class DensityField:
    values: np.ndarray
    integral: float


class Hamiltonian:
    """Hamiltonian with the density (hence the local potential) frozen."""

    def __init__(self, model: "KohnShamModel", potential: np.ndarray):
        self.model = model
        self.potential = potential

    def apply(self, v: BlockArray) -> BlockArray:
        basis = self.model.basis
        if len(v) != basis.nblocks or any(
            b.shape[0] != n for b, n in zip(v, basis.sizes)
        ):
            raise DimensionError(f"block shapes {v.shapes} do not match basis sizes {basis.sizes}")
        out = []
        cols = 0
        for k, vb in enumerate(v):
            blk = basis.kblocks[k]
            if vb.shape[1] == 0:
                out.append(np.zeros_like(vb))
                continue
            cols += vb.shape[1]
            u = basis.to_real(k, vb)
            hv = 2.0 * basis.from_real(k, self.potential[None] * u)
            hv += 2.0 * blk.kinetic[:, None] * vb
            out.append(hv)
        self.model.counter.record(cols, 2 * cols)
        return BlockArray(out)

    __call__ = apply

    def dense(self, k: int = 0) -> np.ndarray:
        """Explicit matrix of this Hamiltonian on k-block ``k``."""
        basis = self.model.basis
        blk = basis.kblocks[k]
        if blk.size > DENSE_SIZE_GUARD:
            raise SizeGuardError(f"dense assembly refused for n={blk.size} > {DENSE_SIZE_GUARD}")
        vhat = scipy.fft.fftn(self.potential) / basis.npoints
        diff = blk.miller[:, None, :] - blk.miller[None, :, :]
        idx = tuple((diff % np.array(basis.grid)).transpose(2, 0, 1))
        h = 2.0 * vhat[idx]
        h[np.diag_indices(blk.size)] += 2.0 * blk.kinetic
        return hermitian(h)


class KohnShamModel:
    """Plane-wave Kohn-Sham-type model with a local nonlinearity.

    Parameters
    ----------
    basis : PlaneWaveBasis
    v_ion : real array on the FFT grid
    kappa : coefficient of ``kappa/2 int rho^2`` (Gross-Pitaevskii-type), ``>= 0``
    c_x : coefficient of ``c_x int rho^(4/3)`` (LDA-exchange-like), ``<= 0``
    hartree : include the periodic Hartree term
    """

    def __init__(
        self,
        basis: PlaneWaveBasis,
        v_ion=None,
        kappa: float = 0.0,
        c_x: float = 0.0,
        hartree: bool = False,
    ):
        if v_ion is None:
            v_ion = np.zeros(basis.grid)
        v_ion = np.asarray(v_ion)
        if np.iscomplexobj(v_ion):
            if np.abs(v_ion.imag).max() > 0:
                raise ParameterError("v_ion must be real-valued")
            v_ion = v_ion.real
        if v_ion.shape != basis.grid:
            raise DimensionError(f"v_ion shape {v_ion.shape} != grid {basis.grid}")
        if kappa < 0:
            raise ParameterError("kappa must be nonnegative")
        if c_x > 0:
            raise ParameterError("c_x must be nonpositive")
        self.basis = basis
        self.v_ion = v_ion.astype(float)
        self.kappa = float(kappa)
        self.c_x = float(c_x)
        self.hartree = bool(hartree)
        self.counter = OpCounter()
        self._g2 = basis.grid_g2()

    @property
    def is_linear(self) -> bool:
        """True when the Hamiltonian does not depend on the density."""
        return self.kappa == 0.0 and self.c_x == 0.0 and not self.hartree

    def shapes(self, p: int):
        return self.basis.shapes(p)

    # -- density and potentials -----------------------------------------
    def density(self, phi: Frame) -> DensityField:
        basis = self.basis
        rho = np.zeros(basis.grid)
        for k, b in enumerate(phi):
            u = basis.to_real(k, b)
            rho += np.sum(np.abs(u) ** 2, axis=0)
        self.counter.record_ffts(sum(b.shape[1] for b in phi))
        rho /= len(phi)
        return DensityField(rho, basis.integrate(rho))

    def hartree_potential(self, rho) -> np.ndarray:
        """Periodic Poisson solve ``v_H(G) = 4 pi rho(G) / |G|^2`` with ``v_H(0) = 0``."""
        values = rho.values if isinstance(rho, DensityField) else np.asarray(rho)
        rhat = scipy.fft.fftn(values)
        with np.errstate(divide="ignore", invalid="ignore"):
            vhat = np.where(self._g2 > 0, 4 * np.pi * rhat / self._g2, 0.0)
        return scipy.fft.ifftn(vhat).real

    def xc_potential(self, rho) -> np.ndarray:
        values = rho.values if isinstance(rho, DensityField) else np.asarray(rho)
        v = self.kappa * values
        if self.c_x != 0.0:
            v = v + (4.0 / 3.0) * self.c_x * np.cbrt(np.maximum(values, 0.0))
        return v

    def local_potential(self, rho) -> np.ndarray:
        v = self.v_ion + self.xc_potential(rho)
        if self.hartree:
            v = v + self.hartree_potential(rho)
        return v

    # -- Hamiltonian -----------------------------------------------------
    def hamiltonian_for_density(self, rho) -> Hamiltonian:
        return Hamiltonian(self, self.local_potential(rho))

    def hamiltonian(self, phi: Frame) -> Hamiltonian:
        return self.hamiltonian_for_density(self.density(phi))

    def apply_hamiltonian(self, phi: Frame, v: BlockArray) -> BlockArray:
        return self.hamiltonian(phi).apply(v)

    def assemble_dense(self, phi: Frame) -> list[np.ndarray]:
        """Dense per-block matrices of the Hamiltonian linearized at ``rho(phi)``."""
        ham = self.hamiltonian(phi)
        return [ham.dense(k) for k in range(self.basis.nblocks)]

    # -- energy ----------------------------------------------------------
    def kinetic_energies(self, phi: Frame) -> list[np.ndarray]:
        """Per-block, per-column kinetic energy ``1/2 sum_G |G+k|^2 |c_G|^2``."""
        return [
            np.einsum("g,gj->j", blk.kinetic, np.abs(b) ** 2)
            for blk, b in zip(self.basis.kblocks, phi)
        ]

    def energy_terms(self, phi: Frame, rho: DensityField | None = None) -> dict[str, float]:
        if rho is None:
            rho = self.density(phi)
        basis = self.basis
        K = len(phi)
        r = rho.values
        terms = {
            "kinetic": float(sum(np.sum(e) for e in self.kinetic_energies(phi))),
            "ion": K * basis.integrate(self.v_ion * r),
            "hartree": 0.0,
            "nonlinear": K * 0.5 * self.kappa * basis.integrate(r * r),
            "exchange": 0.0,
        }
        if self.hartree:
            terms["hartree"] = K * 0.5 * basis.integrate(r * self.hartree_potential(r))
        if self.c_x != 0.0:
            terms["exchange"] = K * self.c_x * basis.integrate(np.maximum(r, 0.0) ** (4.0 / 3.0))
        terms["total"] = float(sum(terms.values()))
        return terms

    def energy(self, phi: Frame) -> float:
        return self.energy_terms(phi)["total"]

    # -- residual ---------------------------------------------------------
    def rayleigh_matrix(self, phi: Frame, hphi: BlockArray | None = None) -> list[np.ndarray]:
        if hphi is None:
            hphi = self.apply_hamiltonian(phi, phi)
        return [hermitian(f.conj().T @ h) for f, h in zip(phi, hphi)]

    def residual(self, phi: Frame, hphi: BlockArray | None = None):
        """Return ``(H phi - phi Lambda, Lambda, H phi)`` from one Hamiltonian application."""
        if hphi is None:
            hphi = self.apply_hamiltonian(phi, phi)
        lam = self.rayleigh_matrix(phi, hphi)
        res = hphi - phi.rmatmul(lam)
        return res, lam, hphi

    # -- preconditioning --------------------------------------------------
    def tpa_preconditioner(self, phi: Frame, alpha_floor: float = 1e-2) -> "TPAPreconditioner":
        alphas = [np.maximum(a, alpha_floor) for a in self.kinetic_energies(phi)]
        return TPAPreconditioner([b.kinetic for b in self.basis.kblocks], alphas)


def tpa_precondition(kinetic, alpha, v: BlockArray) -> BlockArray:
    """Apply ``(1/2 |G+k|^2 + alpha_j)^{-1}`` column-wise in Fourier space.

    ``kinetic[k]`` holds ``1/2 |G+k|^2`` for block ``k``; ``alpha[k]`` is a
    scalar or one positive shift per column.
    """
    out = []
    for kin, a, vb in zip(kinetic, alpha, v):
        a = np.broadcast_to(np.asarray(a, dtype=float), (vb.shape[1],))
        out.append(vb / (kin[:, None] + a[None, :]))
    return BlockArray(out)


class TPAPreconditioner:
    """Teter-Payne-Allan-type diagonal preconditioner with per-column shifts."""

    def __init__(self, kinetic, alphas):
        self.kinetic = kinetic
        self.alphas = alphas

    def __call__(self, v: BlockArray) -> BlockArray:
        return tpa_precondition(self.kinetic, self.alphas, v)
