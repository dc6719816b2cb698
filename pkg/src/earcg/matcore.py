"""Small dense complex-matrix kernels.

All routines act on p x p or q x p matrices with p, q far below the
discretization size, so plain O(p^3) dense linear algebra is optimal.
Hermitian inputs are symmetrized on entry.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionError,
    EigensolverError,
    NearSingularSylvesterError,
    SingularPencilError,
)

DEFAULT_QR_DROP_TOL = 1e-10


def hermitian(a) -> np.ndarray:
    """Return ``(A + A^*) / 2`` as a complex array."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.conj().T)


def herm_eig(a):
    """Eigendecomposition ``A = V diag(d) V^*`` with ascending ``d``."""
    a = hermitian(a)
    try:
        d, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(a.shape[0]) from exc
    return d, v


def solve_lyapunov(s, b) -> np.ndarray:
    """Solve ``S X + X S = B`` for Hermitian positive definite ``S``.

    Uses the closed form ``X = V [(V^* B V)_ij / (d_i + d_j)] V^*`` from the
    eigendecomposition of ``S``.
    """
    b = hermitian(b)
    d, v = herm_eig(s)
    if b.shape != (d.size, d.size):
        raise DimensionError(f"S is {d.size}x{d.size} but B has shape {b.shape}")
    if d[0] <= 1e-13 * max(d[-1], 0.0) or d[-1] <= 0.0:
        raise SingularPencilError(
            f"S is not positive definite: eigenvalues in [{d[0]:.3e}, {d[-1]:.3e}]"
        )
    bt = v.conj().T @ b @ v
    xt = bt / (d[:, None] + d[None, :])
    return hermitian(v @ xt @ v.conj().T)


def solve_small_sylvester(a, sigma, c) -> np.ndarray:
    """Solve ``A Y - Y Sigma = C`` for Hermitian ``A`` (q x q) and ``Sigma`` (p x p)."""
    c = np.asarray(c, dtype=complex)
    alpha, u = herm_eig(a)
    s, w = herm_eig(sigma)
    if c.shape != (alpha.size, s.size):
        raise DimensionError(f"C has shape {c.shape}, expected {(alpha.size, s.size)}")
    denom = alpha[:, None] - s[None, :]
    gap = np.abs(denom).min() if denom.size else np.inf
    scale = np.abs(alpha).max(initial=0.0) + np.abs(s).max(initial=0.0)
    if gap < 1e-12 * scale or gap == 0.0:
        raise NearSingularSylvesterError(gap, alpha, s)
    ct = u.conj().T @ c @ w
    return u @ (ct / denom) @ w.conj().T


def rank_revealing_qr(m, tol: float = DEFAULT_QR_DROP_TOL):
    """Column-pivoted modified Gram-Schmidt with reorthogonalization.

    Columns are taken in order of largest remaining norm.  The process stops
    once the Frobenius norm of what is left falls below ``tol`` times the
    largest column norm of ``m``, so ``||(I - Q Q^*) M||_F <= tol ||M||_F``.

    Returns
    -------
    q : ndarray, shape (n, r)
        Orthonormal columns spanning the numerical range of ``m``.
    r : int
        Numerical rank.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = np.array(m, dtype=complex, copy=True)
    if m.ndim != 2:
        raise DimensionError(f"expected 2D input, got shape {m.shape}")
    n, p = m.shape
    if p == 0 or n == 0:
        return np.zeros((n, 0), dtype=complex), 0
    scale = np.linalg.norm(m, axis=0).max()
    if scale == 0.0:
        return np.zeros((n, 0), dtype=complex), 0

    qs: list[np.ndarray] = []
    remaining = list(range(p))
    while remaining and len(qs) < n:
        norms = np.linalg.norm(m[:, remaining], axis=0)
        if np.sqrt(np.sum(norms**2)) <= tol * scale:
            break
        k = remaining.pop(int(np.argmax(norms)))
        q = m[:, k]
        for _ in range(2):
            if qs:
                qm = np.column_stack(qs)
                q = q - qm @ (qm.conj().T @ q)
        nq = np.linalg.norm(q)
        if nq <= tol * scale:
            continue
        q = q / nq
        qs.append(q)
        if remaining:
            sub = m[:, remaining]
            for _ in range(2):
                sub = sub - np.outer(q, q.conj() @ sub)
            m[:, remaining] = sub
    if not qs:
        return np.zeros((n, 0), dtype=complex), 0
    return np.column_stack(qs), len(qs)
