"""Plain damped self-consistent field iteration with dense diagonalization."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..blocks import BlockArray, Frame
from ..errors import EigensolverError, ParameterError
from ..model.ks import KohnShamModel
from .state import evaluate_point
from .trace import CONVERGED, MAX_ITERS, STAGNATION, IterRecord, SolverTrace


@dataclass(frozen=True)
class ScfConfig:
    """``rho <- (1 - mixing_alpha) rho_in + mixing_alpha rho_out``.

    Stops when ``||rho_out - rho_in||_L2 <= tol_density`` or, if ``res_tol`` is
    set, when the residual of the diagonalized frame falls below it.
    """

    mixing_alpha: float = 0.1
    tol_density: float = 1e-8
    max_iters: int = 200
    res_tol: float | None = None
    stagnation_window: int = 10

    def __post_init__(self):
        if not 0 < self.mixing_alpha <= 1:
            raise ParameterError("mixing_alpha must lie in (0, 1]")
        if not self.tol_density > 0:
            raise ParameterError("tol_density must be positive")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")


def aufbau_frame(ham, p: int) -> tuple[Frame, list[np.ndarray]]:
    """Lowest ``p`` eigenvectors of every dense Hamiltonian block."""
    blocks, evals = [], []
    for k in range(ham.model.basis.nblocks):
        h = ham.dense(k)
        try:
            d, v = scipy.linalg.eigh(h, subset_by_index=[0, p - 1])
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(h.shape[0]) from exc
        blocks.append(v)
        evals.append(d)
    return BlockArray(blocks), evals


def _stalled(diffs: list[float], window: int) -> bool:
    if window <= 0 or len(diffs) <= window:
        return False
    tail = diffs[-(window + 1):]
    return all(b >= a for a, b in zip(tail, tail[1:]))


def run_scf(model: KohnShamModel, phi0: Frame, cfg: ScfConfig = ScfConfig()):
    """Fixed-point SCF started from the density of ``phi0``.

    Every iteration records the energy and residual of the new frame at its
    own density (one Hamiltonian application).  A linear model terminates
    after a single diagonalization.
    """
    p = phi0.ncols
    counter = model.counter
    base_apps, base_cols, _ = counter.snapshot()
    t0 = time.monotonic()
    trace = SolverTrace("scf", p, len(phi0))

    def record(it, pt):
        apps, cols, _ = counter.snapshot()
        trace.append(
            IterRecord(
                iter=it,
                energy=pt.energy,
                res_fro=pt.res_norm,
                ham_applies=apps - base_apps,
                columns_applied=cols - base_cols,
                wall_s=time.monotonic() - t0,
                tau=cfg.mixing_alpha,
            )
        )

    pt = evaluate_point(model, phi0)
    record(0, pt)
    rho_in = pt.rho.values
    phi = phi0
    diffs: list[float] = []
    status = MAX_ITERS
    for it in range(1, cfg.max_iters + 1):
        ham = model.hamiltonian_for_density(rho_in)
        phi, _ = aufbau_frame(ham, p)
        pt = evaluate_point(model, phi)
        record(it, pt)
        rho_out = pt.rho.values
        diff = float(np.sqrt(model.basis.integrate((rho_out - rho_in) ** 2)))
        diffs.append(diff)
        if model.is_linear or diff <= cfg.tol_density:
            status = CONVERGED
            break
        if cfg.res_tol is not None and pt.res_norm <= cfg.res_tol:
            status = CONVERGED
            break
        if _stalled(diffs, cfg.stagnation_window):
            status = STAGNATION
            trace.messages.append(f"density difference non-decreasing for {cfg.stagnation_window} steps")
            break
        rho_in = (1 - cfg.mixing_alpha) * rho_in + cfg.mixing_alpha * rho_out
    trace.status = status
    trace.messages.append(f"final density difference {diffs[-1]:.3e}" if diffs else "no iterations")
    return phi, trace
