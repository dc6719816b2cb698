"""Energy-adaptive metric induced by the shifted Hamiltonian.

Production path
    :func:`build_shift`, :func:`apply_shifted`, :func:`fom_solve` (preconditioned
    block FOM for ``H X - X Sigma = rhs``), :func:`ea_gradient`, :func:`ea_inner`.

Dense oracles (small bases only)
    :class:`DenseShiftedOperator`, :func:`exact_sylvester_solve`,
    :func:`exact_xphi_oracle`, :func:`exact_projection_oracle`,
    :func:`tangent_space_spectra`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .blocks import BlockArray, Frame, TangentVector
from .errors import IllConditionedGramError, ParameterError, SizeGuardError, SpectralError
from .matcore import hermitian, rank_revealing_qr, solve_small_sylvester
from .model.ks import DENSE_SIZE_GUARD, Hamiltonian
from .stiefel import real_pairing

DEFAULT_MU = 0.01
DEFAULT_FOM_TOL = 2.5e-2


@dataclass(frozen=True)
class ShiftSpec:
    """Per-block shift ``Sigma = Lambda - mu I`` defining ``H_Sigma(v) = H v - v Sigma``."""

    sigma: tuple[np.ndarray, ...]
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ParameterError(f"shift correction mu must be positive, got {self.mu}")


@dataclass(frozen=True)
class FomConfig:
    rel_tol: float = DEFAULT_FOM_TOL
    max_block_iters: int = 20
    qr_drop_tol: float = 1e-10

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ParameterError(f"FOM rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_block_iters < 1:
            raise ParameterError("max_block_iters must be >= 1")
        if self.qr_drop_tol <= 0:
            raise ParameterError("qr_drop_tol must be positive")


@dataclass
class FomResult:
    x: BlockArray
    converged: bool
    stagnated: bool
    iterations: int
    rel_residual: float
    history: list[float] = field(default_factory=list)


def build_shift(lam, mu: float = DEFAULT_MU) -> ShiftSpec:
    """Corrected shift ``Sigma_k = Lambda_k - mu I`` for every block."""
    if not mu > 0:
        raise ParameterError(f"shift correction mu must be positive, got {mu}")
    sig = tuple(hermitian(l) - mu * np.eye(l.shape[0]) for l in lam)
    return ShiftSpec(sig, float(mu))


def uniform_shift(sigma: float, p: int, nblocks: int = 1) -> ShiftSpec:
    """Uniform shift ``Sigma = -sigma I`` (``mu`` is recorded as ``sigma``, unused)."""
    return ShiftSpec(tuple(-sigma * np.eye(p, dtype=complex) for _ in range(nblocks)), max(sigma, 1e-300))


def apply_shifted(ham: Hamiltonian, shift: ShiftSpec, v: BlockArray, hv: BlockArray | None = None) -> BlockArray:
    """``H v - v Sigma``; pass ``hv`` to reuse an existing ``H v``."""
    if hv is None:
        hv = ham.apply(v)
    return hv - v.rmatmul(list(shift.sigma))


def ea_inner(ham: Hamiltonian, shift: ShiftSpec, eta: TangentVector, xi: TangentVector) -> float:
    """Energy-adaptive metric ``g(eta, xi) = <H_Sigma(eta), xi>``."""
    return real_pairing(apply_shifted(ham, shift, eta), xi)


def _project_out(v: np.ndarray, z: np.ndarray) -> np.ndarray:
    if v.shape[1] == 0:
        return z
    for _ in range(2):
        z = z - v @ (v.conj().T @ z)
    return z


def fom_solve(
    ham: Hamiltonian,
    shift: ShiftSpec,
    rhs: BlockArray,
    x0: BlockArray,
    cfg: FomConfig = FomConfig(),
    precond=None,
    h_x0: BlockArray | None = None,
) -> FomResult:
    """Preconditioned block FOM for the Sylvester system ``H X - X Sigma = rhs``.

    All k-blocks advance together so each block iteration costs a single
    Hamiltonian application.  Iteration stops when the Frobenius residual,
    relative to that of ``x0``, drops to ``cfg.rel_tol``.  If the basis stops
    growing or ``cfg.max_block_iters`` is reached first, the iterate with the
    smallest residual is returned with ``stagnated=True``.

    ``h_x0`` may supply ``H x0`` (e.g. ``H phi / mu`` for ``x0 = phi / mu``)
    to avoid one application.
    """
    if precond is None:
        precond = lambda v: v  # noqa: E731
    sig = list(shift.sigma)
    if h_x0 is None:
        h_x0 = ham.apply(x0)
    c = rhs - (h_x0 - x0.rmatmul(sig))
    c_norm = c.norm()
    if c_norm == 0.0:
        return FomResult(x0, True, False, 0, 0.0, [0.0])

    tol = cfg.qr_drop_tol
    r0 = precond(c)
    vs = [rank_revealing_qr(b, tol)[0] for b in r0]
    ws = list(ham.apply(BlockArray(vs)))
    amats = [hermitian(v.conj().T @ w) for v, w in zip(vs, ws)]
    cps = [v.conj().T @ cb for v, cb in zip(vs, c)]

    history: list[float] = []
    converged = stagnated = False
    ys = best_ys = None
    best_rel = np.inf
    it = 0
    for it in range(1, cfg.max_block_iters + 1):
        ys = [
            solve_small_sylvester(a, s, cp) if a.shape[0] else np.zeros((0, s.shape[0]), complex)
            for a, s, cp in zip(amats, sig, cps)
        ]
        res = BlockArray(
            cb - (w @ y - v @ (y @ s)) for cb, w, v, y, s in zip(c, ws, vs, ys, sig)
        )
        rel = res.norm() / c_norm
        history.append(rel)
        if rel < best_rel:
            best_rel, best_ys = rel, ys
        if rel <= cfg.rel_tol:
            converged = True
            break
        if it == cfg.max_block_iters:
            # FOM residuals are not monotone: fall back to the best iterate seen
            stagnated = True
            ys = best_ys
            break

        z = precond(res)
        new = []
        for v, zb in zip(vs, z):
            before = np.linalg.norm(zb, axis=0).max(initial=0.0)
            zp = _project_out(v, zb)
            n_left = zb.shape[0] - v.shape[1]
            if before == 0.0 or n_left <= 0 or np.linalg.norm(zp, axis=0).max() <= tol * before:
                new.append(np.zeros((zb.shape[0], 0), complex))
                continue
            q, _ = rank_revealing_qr(zp, tol)
            new.append(_project_out(v, q)[:, : min(q.shape[1], n_left)])
        if all(b.shape[1] == 0 for b in new):
            stagnated = True
            ys = best_ys
            break
        wnew = list(ham.apply(BlockArray(new)))
        for k, (vt, wt) in enumerate(zip(new, wnew)):
            if vt.shape[1] == 0:
                continue
            h12 = vs[k].conj().T @ wt
            h22 = vt.conj().T @ wt
            amats[k] = hermitian(np.block([[amats[k], h12], [h12.conj().T, h22]]))
            cps[k] = np.vstack([cps[k], vt.conj().T @ c[k]])
            vs[k] = np.hstack([vs[k], vt])
            ws[k] = np.hstack([ws[k], wt])

    x = BlockArray(xb + v[:, : y.shape[0]] @ y for xb, v, y in zip(x0, vs, ys))
    rel = history[-1] if converged else min(history)
    return FomResult(x, converged, stagnated, it, rel, history)


def ea_gradient(phi: Frame, x: BlockArray, cond_max: float = 1e12) -> TangentVector:
    """Inexact energy-adaptive gradient ``G = phi - x (phi^* x)^{-1}``.

    Horizontal by construction: ``phi^* G = 0`` regardless of how well ``x``
    solves the shifted system.
    """
    out = []
    for fb, xb in zip(phi, x):
        gram = fb.conj().T @ xb
        cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > cond_max:
            raise IllConditionedGramError(f"<phi, x> has condition number {cond:.3e}")
        out.append(fb - np.linalg.solve(gram.T, xb.T).T)
    return BlockArray(out)


# ---------------------------------------------------------------------------
# Dense oracles
# ---------------------------------------------------------------------------

def _vec(x: np.ndarray) -> np.ndarray:
    return x.reshape(-1, order="F")


def _unvec(v: np.ndarray, shape) -> np.ndarray:
    return v.reshape(shape, order="F")


class DenseShiftedOperator:
    """Kronecker form ``I_p (x) H - Sigma^T (x) I_n`` of one block's shifted Hamiltonian."""

    def __init__(self, h: np.ndarray, sigma: np.ndarray, check_tol: float = 1e-12):
        n, p = h.shape[0], sigma.shape[0]
        if n * p > 2 * DENSE_SIZE_GUARD:
            raise SizeGuardError(f"dense shifted operator of size {n * p} refused")
        self.n, self.p = n, p
        eh = np.linalg.eigvalsh(h)
        es = np.linalg.eigvalsh(sigma)
        resonance = np.abs(eh[:, None] - es[None, :]).min()
        if resonance <= check_tol * (np.abs(eh).max() + np.abs(es).max()):
            raise SpectralError(resonance)
        self.resonance = resonance
        self.matrix = np.kron(np.eye(p), h) - np.kron(sigma.T, np.eye(n))
        self._lu = scipy.linalg.lu_factor(self.matrix)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return _unvec(self.matrix @ _vec(x), x.shape)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return _unvec(scipy.linalg.lu_solve(self._lu, _vec(rhs)), rhs.shape)

    def solve_many(self, rhs_list):
        cols = np.column_stack([_vec(r) for r in rhs_list])
        sol = scipy.linalg.lu_solve(self._lu, cols)
        return [_unvec(sol[:, i], rhs_list[0].shape) for i in range(sol.shape[1])]


def _dense_ops(h_dense, shift: ShiftSpec):
    return [DenseShiftedOperator(h, s) for h, s in zip(h_dense, shift.sigma)]


def exact_sylvester_solve(h_dense, shift: ShiftSpec, rhs: BlockArray) -> BlockArray:
    """Exact ``H_Sigma^{-1}(rhs)`` by dense LU of the Kronecker operator."""
    return BlockArray(op.solve(r) for op, r in zip(_dense_ops(h_dense, shift), rhs))


def herm_basis(p: int) -> list[np.ndarray]:
    """Orthonormal basis of Herm(p) for the real pairing ``Re tr(A^* B)``."""
    out = []
    for i in range(p):
        e = np.zeros((p, p), complex)
        e[i, i] = 1
        out.append(e)
    for i in range(p):
        for j in range(i + 1, p):
            e = np.zeros((p, p), complex)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            out.append(e)
            e = np.zeros((p, p), complex)
            e[i, j], e[j, i] = 1j / np.sqrt(2), -1j / np.sqrt(2)
            out.append(e)
    return out


def _solve_hermitian_constraint(op: DenseShiftedOperator, phi: np.ndarray, target: np.ndarray):
    """Find Hermitian ``X`` with ``<Z, phi> + <phi, Z> = target``, ``Z = H_Sigma^{-1}(phi X)``."""
    basis = herm_basis(phi.shape[1])
    zs = op.solve_many([phi @ b for b in basis])
    lmat = np.empty((len(basis), len(basis)))
    for l, z in enumerate(zs):
        g = phi.conj().T @ z
        img = g + g.conj().T
        lmat[:, l] = [np.vdot(b, img).real for b in basis]
    t = np.array([np.vdot(b, hermitian(target)).real for b in basis])
    coef = np.linalg.solve(lmat, t)
    x = sum(c * b for c, b in zip(coef, basis))
    z = sum(c * zz for c, zz in zip(coef, zs))
    return hermitian(x), z


def exact_xphi_oracle(phi: Frame, h_dense, shift: ShiftSpec):
    """Exact energy-adaptive gradient via the Hermitian matrix equation for ``X_phi``.

    Returns ``(X, grad)`` where ``X[k]`` solves
    ``<H^{-1}(phi X), phi> + <phi, H^{-1}(phi X)> = 2 I`` on block ``k`` and
    ``grad = phi - H_Sigma^{-1}(phi X)``.
    """
    xs, grads = [], []
    for op, fb in zip(_dense_ops(h_dense, shift), phi):
        x, z = _solve_hermitian_constraint(op, fb, 2 * np.eye(fb.shape[1]))
        xs.append(x)
        grads.append(fb - z)
    return xs, BlockArray(grads)


def exact_projection_oracle(phi: Frame, h_dense, shift: ShiftSpec, v: BlockArray) -> TangentVector:
    """Energy-adaptive projection ``P(v) = v - H_Sigma^{-1}(phi X_v)`` onto the tangent space."""
    out = []
    for op, fb, vb in zip(_dense_ops(h_dense, shift), phi, v):
        g = vb.conj().T @ fb
        _, z = _solve_hermitian_constraint(op, fb, g + g.conj().T)
        out.append(vb - z)
    return BlockArray(out)


def _real_form(lmat: np.ndarray) -> np.ndarray:
    return np.block([[lmat.real, -lmat.imag], [lmat.imag, lmat.real]])


def _as_real(x: np.ndarray) -> np.ndarray:
    v = _vec(x)
    return np.concatenate([v.real, v.imag])


def tangent_basis(phi_block: np.ndarray):
    """Real orthonormal bases ``(horizontal, vertical)`` of the tangent space at one block.

    Columns are real vectors ``[Re vec(eta); Im vec(eta)]``.
    """
    n, p = phi_block.shape
    q, _ = np.linalg.qr(phi_block, mode="complete")
    qperp = q[:, p:]
    hor = []
    for i in range(n - p):
        for j in range(p):
            e = np.zeros((n, p), complex)
            e[:, j] = qperp[:, i]
            hor.append(_as_real(e))
            hor.append(_as_real(1j * e))
    ver = []
    for m in herm_basis(p):
        ver.append(_as_real(phi_block @ (1j * m)))
    return np.column_stack(hor), np.column_stack(ver)


def tangent_space_spectra(phi: Frame, h_dense, shift):
    """Spectra of the shifted Hamiltonian's real form restricted to tangent subspaces.

    ``shift`` is a :class:`ShiftSpec` or a plain sequence of per-block
    Hermitian matrices (e.g. ``Lambda`` itself for the uncorrected shift).
    Returns ``(full, vertical)`` lists (one ascending eigenvalue array per
    block) for the whole tangent space and for ``{phi M : M skew-Hermitian}``.
    """
    sigmas = shift.sigma if isinstance(shift, ShiftSpec) else tuple(hermitian(s) for s in shift)
    full, vert = [], []
    for h, s, fb in zip(h_dense, sigmas, phi):
        n, p = fb.shape
        lmat = _real_form(np.kron(np.eye(p), h) - np.kron(s.T, np.eye(n)))
        bh, bv = tangent_basis(fb)
        b = np.hstack([bh, bv])
        g = b.T @ lmat @ b
        full.append(np.linalg.eigvalsh(0.5 * (g + g.T)))
        gv = bv.T @ lmat @ bv
        vert.append(np.linalg.eigvalsh(0.5 * (gv + gv.T)))
    return full, vert
