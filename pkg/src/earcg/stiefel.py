"""Geometry of the (product) complex Stiefel manifold.

A point is a :class:`~earcg.blocks.BlockArray` whose blocks have
orthonormal columns.  All maps act block by block; inner products sum over
blocks.  The polar factor ``pf(psi) = psi (psi^* psi)^{-1/2}`` gives the
retraction, and its derivative gives the vector transport.
"""

from __future__ import annotations

import numpy as np

from .blocks import BlockArray, Frame, TangentVector
from .errors import DimensionError, RankDeficiencyError
from .matcore import herm_eig, hermitian, solve_lyapunov

DEFAULT_MANIFOLD_TOL = 1e-10
_RANK_TOL = 1e-13


def _same_shapes(a: BlockArray, b: BlockArray):
    if a.shapes != b.shapes:
        raise DimensionError(f"shape mismatch {a.shapes} vs {b.shapes}")


def outer(v: BlockArray, w: BlockArray) -> list[np.ndarray]:
    """Per-block outer product ``V_k^* W_k`` (conjugate-linear in ``v``)."""
    if len(v) != len(w) or any(a.shape[0] != b.shape[0] for a, b in zip(v, w)):
        raise DimensionError(f"shape mismatch {v.shapes} vs {w.shapes}")
    return [a.conj().T @ b for a, b in zip(v, w)]


def real_pairing(a: BlockArray, b: BlockArray) -> float:
    """Real Frobenius pairing ``Re tr(sum_k a_k^* b_k)``."""
    _same_shapes(a, b)
    return float(sum(np.vdot(x, y).real for x, y in zip(a, b)))


# -- polar decomposition -----------------------------------------------------

def _polar_block(psi: np.ndarray):
    d, v = herm_eig(psi.conj().T @ psi)
    if d[0] <= _RANK_TOL:
        raise RankDeficiencyError(
            f"frame block has numerically dependent columns (min Gram eigenvalue {d[0]:.3e})"
        )
    sq = np.sqrt(d)
    s = (v * sq) @ v.conj().T
    s_inv = (v / sq) @ v.conj().T
    return psi @ s_inv, hermitian(s), hermitian(s_inv)


def polar_decompose(psi: BlockArray):
    """Return ``(pf(psi), [sf], [sf^{-1}])`` block-wise."""
    parts = [_polar_block(b) for b in psi]
    return (
        BlockArray(p[0] for p in parts),
        [p[1] for p in parts],
        [p[2] for p in parts],
    )


def polar_factor(psi: BlockArray) -> Frame:
    return polar_decompose(psi)[0]


def polar_retract(phi: Frame, eta: TangentVector) -> Frame:
    """Polar retraction ``R_phi(eta) = pf(phi + eta)``."""
    _same_shapes(phi, eta)
    return polar_factor(phi + eta)


def dpf(psi: BlockArray, v: BlockArray) -> BlockArray:
    """Directional derivative of the polar factor at ``psi`` along ``v``.

    ``Dpf(psi)[v] = (v - pf(psi) X) sf(psi)^{-1}`` where ``X`` solves the
    Lyapunov equation ``sf X + X sf = psi^* v + v^* psi``.
    """
    _same_shapes(psi, v)
    out = []
    for pb, vb in zip(psi, v):
        q, s, s_inv = _polar_block(pb)
        rhs = pb.conj().T @ vb
        x = solve_lyapunov(s, rhs + rhs.conj().T)
        out.append((vb - q @ x) @ s_inv)
    return BlockArray(out)


def polar_transport(phi: Frame, tau: float, eta: TangentVector) -> TangentVector:
    """Differentiated polar transport of ``eta`` along ``tau * eta``.

    Closed form ``eta S^{-1} - tau R (eta S^{-1})^* (eta S^{-1})`` with
    ``S = sf(phi + tau eta)`` and ``R = pf(phi + tau eta)``.
    """
    _same_shapes(phi, eta)
    out = []
    for fb, eb in zip(phi, eta):
        r, _, s_inv = _polar_block(fb + tau * eb)
        es = eb @ s_inv
        out.append(es - tau * r @ (es.conj().T @ es))
    return BlockArray(out)


def transport(phi: Frame, xi: TangentVector, v: TangentVector) -> TangentVector:
    """Differentiated polar transport ``D R_phi(xi)[v]`` for arbitrary ``v``."""
    return dpf(phi + xi, v)


# -- tangent spaces ----------------------------------------------------------

def project_tangent(phi: Frame, v: BlockArray) -> TangentVector:
    """L2-orthogonal projection onto the tangent space at ``phi``."""
    _same_shapes(phi, v)
    return BlockArray(vb - fb @ hermitian(fb.conj().T @ vb) for fb, vb in zip(phi, v))


def orthonormality_error(phi: Frame) -> float:
    return max(
        np.linalg.norm(b.conj().T @ b - np.eye(b.shape[1])) for b in phi
    )


def is_on_manifold(phi: Frame, tol: float = DEFAULT_MANIFOLD_TOL) -> bool:
    return orthonormality_error(phi) <= tol


def tangency_error(phi: Frame, eta: TangentVector) -> float:
    _same_shapes(phi, eta)
    worst = 0.0
    for fb, eb in zip(phi, eta):
        m = fb.conj().T @ eb
        worst = max(worst, np.linalg.norm(m + m.conj().T))
    return worst


def is_tangent(phi: Frame, eta: TangentVector, tol: float = DEFAULT_MANIFOLD_TOL) -> bool:
    return tangency_error(phi, eta) <= tol * max(1.0, eta.norm())


# -- random sampling (tests, initial guesses) --------------------------------

def random_frame(rng: np.random.Generator, shapes) -> Frame:
    """Haar-like random orthonormal frame with the given ``(n_k, p)`` block shapes."""
    blocks = []
    for n, p in shapes:
        z = rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p))
        q, r = np.linalg.qr(z)
        blocks.append(q * (np.diag(r) / np.abs(np.diag(r))).conj())
    return BlockArray(blocks)


def random_tangent(rng: np.random.Generator, phi: Frame) -> TangentVector:
    z = BlockArray(
        rng.standard_normal(b.shape) + 1j * rng.standard_normal(b.shape) for b in phi
    )
    return project_tangent(phi, z)
