"""Plane-wave basis on a periodic orthorhombic box."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from ..errors import DimensionError, ParameterError


@dataclass(frozen=True)
class KBlock:
    """Fourier modes retained for one k-point.

    Attributes
    ----------
    kfrac : fractional k-offset (units of the reciprocal lattice vectors)
    miller : (n, d) integer mode indices
    gk : (n, d) Cartesian wave vectors ``G + k``
    kinetic : (n,) kinetic energies ``|G + k|^2 / 2``
    flat : (n,) raveled positions on the FFT grid
    """

    kfrac: tuple[float, ...]
    miller: np.ndarray
    gk: np.ndarray
    kinetic: np.ndarray
    flat: np.ndarray

    @property
    def size(self) -> int:
        return self.miller.shape[0]


@dataclass(frozen=True)
class PlaneWaveBasis:
    """Periodic box ``[0, L_1) x ... x [0, L_d)`` with an ``Ecut`` mode cutoff.

    Plane waves ``exp(i (G+k).x) / sqrt(|Omega|)`` are L2-orthonormal, so a
    frame is stored as its matrix of Fourier coefficients.
    """

    lengths: tuple[float, ...]
    grid: tuple[int, ...]
    ecut: float
    kblocks: tuple[KBlock, ...] = field(repr=False)

    @classmethod
    def create(cls, lengths, ecut, grid=None, kpoints=None) -> "PlaneWaveBasis":
        lengths = tuple(float(x) for x in np.atleast_1d(lengths))
        dim = len(lengths)
        if dim not in (1, 2, 3) or min(lengths) <= 0:
            raise ParameterError(f"box lengths must be 1-3 positive reals, got {lengths}")
        if ecut <= 0:
            raise ParameterError("Ecut must be positive")
        if kpoints is None:
            kpoints = [(0.0,) * dim]
        kpoints = [tuple(float(c) for c in np.atleast_1d(k)) for k in kpoints]
        if any(len(k) != dim for k in kpoints):
            raise DimensionError("k-point dimension does not match the box")

        recip = 2 * np.pi / np.array(lengths)
        gmax = np.sqrt(2 * ecut)
        mmax = [int(np.floor(gmax / b)) + 2 for b in recip]
        ranges = [np.arange(-m, m + 1) for m in mmax]
        allm = np.array(list(itertools.product(*ranges)), dtype=int).reshape(-1, dim)

        selected = []
        for k in kpoints:
            gk = (allm + np.array(k)) * recip
            kin = 0.5 * np.sum(gk**2, axis=1)
            keep = kin <= ecut
            # deterministic ordering: by kinetic energy, then lexicographically
            order = np.lexsort(tuple(allm[keep].T[::-1]) + (np.round(kin[keep], 12),))
            selected.append((k, allm[keep][order], gk[keep][order], kin[keep][order]))

        span = np.max([np.abs(s[1]).max(axis=0) for s in selected], axis=0)
        if grid is None:
            grid = tuple(scipy.fft.next_fast_len(int(4 * m + 1)) for m in span)
        grid = tuple(int(g) for g in np.atleast_1d(grid))
        if len(grid) != dim:
            raise DimensionError("grid dimension does not match the box")
        for g, m in zip(grid, span):
            if g < 2 * m + 1:
                raise ParameterError(
                    f"FFT grid {grid} too small for mode index {int(m)} (need >= {2 * m + 1})"
                )

        blocks = []
        for k, miller, gk, kin in selected:
            flat = np.ravel_multi_index(tuple((miller % np.array(grid)).T), grid)
            blocks.append(KBlock(k, miller, gk, kin, flat))
        return cls(lengths, grid, float(ecut), tuple(blocks))

    # -- geometry --------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.lengths)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def npoints(self) -> int:
        return int(np.prod(self.grid))

    @property
    def nblocks(self) -> int:
        return len(self.kblocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.kblocks)

    def shapes(self, p: int) -> tuple[tuple[int, int], ...]:
        return tuple((n, p) for n in self.sizes)

    def coords(self) -> list[np.ndarray]:
        """Meshgrid of real-space sample points ``x_r = r L / N``."""
        axes = [np.arange(n) * (L / n) for n, L in zip(self.grid, self.lengths)]
        return np.meshgrid(*axes, indexing="ij")

    def grid_g2(self) -> np.ndarray:
        """``|G|^2`` for every FFT grid frequency (used for the Poisson solve)."""
        freqs = [
            2 * np.pi * np.fft.fftfreq(n, d=L / n) for n, L in zip(self.grid, self.lengths)
        ]
        mesh = np.meshgrid(*freqs, indexing="ij")
        return sum(g**2 for g in mesh)

    def integrate(self, f: np.ndarray) -> float:
        """Grid quadrature ``|Omega| / N * sum_r f(x_r)``."""
        return float(np.sum(f) * self.volume / self.npoints)

    # -- transforms ------------------------------------------------------
    def to_real(self, k: int, c: np.ndarray) -> np.ndarray:
        """Coefficients ``(n_k, m)`` -> periodic parts on the grid, shape ``(m, *grid)``."""
        blk = self.kblocks[k]
        c = np.asarray(c)
        m = c.shape[1]
        f = np.zeros((m, self.npoints), dtype=complex)
        f[:, blk.flat] = c.T
        f = f.reshape((m,) + self.grid)
        axes = tuple(range(1, self.dim + 1))
        return scipy.fft.ifftn(f, axes=axes) * (self.npoints / np.sqrt(self.volume))

    def from_real(self, k: int, u: np.ndarray) -> np.ndarray:
        """Galerkin projection of grid functions ``(m, *grid)`` onto the block's modes.

        Adjoint of :meth:`to_real` with respect to grid quadrature.
        """
        blk = self.kblocks[k]
        axes = tuple(range(1, self.dim + 1))
        f = scipy.fft.fftn(u, axes=axes).reshape(u.shape[0], -1)
        return (f[:, blk.flat] * (np.sqrt(self.volume) / self.npoints)).T
