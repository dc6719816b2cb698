"""Block matrices: one complex ``(n_k, p)`` array per k-block.

Points on the product Stiefel manifold, tangent vectors, residuals and
Krylov blocks are all represented by :class:`BlockArray`.  Blocks are
mathematically independent; algebra acts block-wise.
"""

from __future__ import annotations

from numbers import Number
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError


class BlockArray:
    """Immutable-by-convention list of complex 2D arrays."""

    __slots__ = ("blocks",)
    __array_priority__ = 1000  # keep ``scalar * BlockArray`` on our side

    def __init__(self, blocks: Iterable[np.ndarray]):
        out = []
        for b in blocks:
            a = np.asarray(b, dtype=complex)
            if a.ndim == 1:
                a = a[:, None]
            if a.ndim != 2:
                raise DimensionError(f"block must be 2D, got shape {a.shape}")
            out.append(a)
        self.blocks = tuple(out)

    @classmethod
    def single(cls, a: np.ndarray) -> "BlockArray":
        return cls([a])

    @classmethod
    def zeros(cls, shapes: Sequence[tuple[int, int]]) -> "BlockArray":
        return cls([np.zeros(s, dtype=complex) for s in shapes])

    # -- structure -----------------------------------------------------
    @property
    def nblocks(self) -> int:
        return len(self.blocks)

    @property
    def shapes(self) -> tuple[tuple[int, int], ...]:
        return tuple(b.shape for b in self.blocks)

    @property
    def ncols(self) -> int:
        """Shared column count; raises if blocks disagree."""
        cols = {b.shape[1] for b in self.blocks}
        if len(cols) != 1:
            raise DimensionError(f"blocks have differing column counts {sorted(cols)}")
        return cols.pop()

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, k):
        return self.blocks[k]

    def _check(self, other: "BlockArray"):
        if not isinstance(other, BlockArray):
            return NotImplemented
        if self.shapes != other.shapes:
            raise DimensionError(f"shape mismatch {self.shapes} vs {other.shapes}")
        return None

    # -- algebra -------------------------------------------------------
    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return BlockArray(a + b for a, b in zip(self.blocks, other.blocks))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return BlockArray(a - b for a, b in zip(self.blocks, other.blocks))

    def __neg__(self):
        return BlockArray(-a for a in self.blocks)

    def __mul__(self, s):
        if not isinstance(s, Number):
            return NotImplemented
        return BlockArray(s * a for a in self.blocks)

    __rmul__ = __mul__

    def __truediv__(self, s):
        if not isinstance(s, Number):
            return NotImplemented
        return BlockArray(a / s for a in self.blocks)

    def rmatmul(self, mats) -> "BlockArray":
        """Right-multiply block k by ``mats[k]`` (or every block by one matrix)."""
        if isinstance(mats, np.ndarray) and mats.ndim == 2:
            mats = [mats] * self.nblocks
        if len(mats) != self.nblocks:
            raise DimensionError(f"{len(mats)} matrices for {self.nblocks} blocks")
        return BlockArray(a @ m for a, m in zip(self.blocks, mats))

    def copy(self) -> "BlockArray":
        return BlockArray(a.copy() for a in self.blocks)

    def zeros_like(self) -> "BlockArray":
        return BlockArray(np.zeros_like(a) for a in self.blocks)

    def norm(self) -> float:
        """Frobenius norm over all blocks."""
        return float(np.sqrt(sum(np.vdot(a, a).real for a in self.blocks)))

    def block_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(a) for a in self.blocks])

    def allclose(self, other: "BlockArray", atol=0.0, rtol=1e-12) -> bool:
        return self.shapes == other.shapes and all(
            np.allclose(a, b, atol=atol, rtol=rtol) for a, b in zip(self.blocks, other.blocks)
        )

    def isfinite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.blocks)

    def __repr__(self):
        return f"BlockArray(shapes={list(self.shapes)})"


# Points on the product Stiefel manifold and their tangent vectors share
# the representation; the names document intent at call sites.
Frame = BlockArray
TangentVector = BlockArray
