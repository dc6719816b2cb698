"""Named external potentials sampled on the FFT grid."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from .basis import PlaneWaveBasis

POTENTIALS = ("cosine-well", "double-well", "random-smooth", "zero")


def _min_image(x, center, length):
    d = x - center
    return d - length * np.round(d / length)


def cosine_well(basis: PlaneWaveBasis, depth: float = 1.0) -> np.ndarray:
    """Harmonic-like well centred in the box: ``depth/2 * sum_d (1 - cos(2 pi (x_d - L_d/2) / L_d))``."""
    xs = basis.coords()
    v = np.zeros(basis.grid)
    for x, L in zip(xs, basis.lengths):
        v += 0.5 * depth * (1 - np.cos(2 * np.pi * (x - L / 2) / L))
    return v


def double_well(
    basis: PlaneWaveBasis, depth: float = 1.0, width: float = 0.5, bias: float = 0.0
) -> np.ndarray:
    """Two Gaussian wells at ``L/4`` and ``3L/4`` along the first axis.

    The remaining axes (if any) carry a cosine confinement of the same depth.
    ``bias`` deepens the second well by ``bias * depth``.
    """
    if width <= 0:
        raise ParameterError("double-well width must be positive")
    xs = basis.coords()
    L0 = basis.lengths[0]
    d1 = _min_image(xs[0], 0.25 * L0, L0)
    d2 = _min_image(xs[0], 0.75 * L0, L0)
    v = depth * (
        1.0 - np.exp(-((d1 / width) ** 2)) - (1.0 + bias) * np.exp(-((d2 / width) ** 2))
    )
    for x, L in zip(xs[1:], basis.lengths[1:]):
        v = v + 0.5 * depth * (1 - np.cos(2 * np.pi * (x - L / 2) / L))
    return v


def random_smooth(
    basis: PlaneWaveBasis, depth: float = 1.0, seed: int = 0, modes: int = 4
) -> np.ndarray:
    """Random real trigonometric polynomial with at most ``modes`` harmonics per axis.

    Scaled so that ``max |v| = depth``; reproducible for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    xs = basis.coords()
    v = np.zeros(basis.grid)
    ranges = [np.arange(-modes, modes + 1)] * basis.dim
    for m in np.array(np.meshgrid(*ranges, indexing="ij")).reshape(basis.dim, -1).T:
        if not m.any():
            continue
        amp = rng.standard_normal() * np.exp(-0.5 * np.sum(m**2) / max(modes, 1))
        phase = rng.uniform(0, 2 * np.pi)
        arg = sum(2 * np.pi * mi * x / L for mi, x, L in zip(m, xs, basis.lengths))
        v += amp * np.cos(arg + phase)
    vmax = np.abs(v).max()
    return depth * v / vmax if vmax > 0 else v


def build_potential(basis: PlaneWaveBasis, kind: str, **params) -> np.ndarray:
    if kind == "cosine-well":
        return cosine_well(basis, **params)
    if kind == "double-well":
        return double_well(basis, **params)
    if kind == "random-smooth":
        return random_smooth(basis, **params)
    if kind == "zero":
        return np.zeros(basis.grid)
    raise ParameterError(f"unknown potential '{kind}'; expected one of {POTENTIALS}")
