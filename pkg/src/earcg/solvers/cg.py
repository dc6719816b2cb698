"""Conjugate-gradient parameters in residual-pairing form.

All formulas use the pairing ``<r, g>`` between the residual and the
gradient, which equals the metric inner product ``g(grad E, g)`` and so
needs no extra metric application.
"""

from __future__ import annotations

import math

from ..errors import ParameterError

CG_VARIANTS = ("fr", "prp", "hybrid", "none")
PAIRING_FLOOR = 1e-300


def beta_fr(rg_old: float, rg_new: float) -> float:
    """Fletcher-Reeves ``<r+, g+> / <r, g>``; 0 (restart) if the denominator vanishes."""
    if abs(rg_old) < PAIRING_FLOOR:
        return 0.0
    return rg_new / rg_old


def beta_prp(rg_old: float, rg_new: float, r_new_tg_old: float) -> float:
    """Polak-Ribiere-Polyak ``<r+, g+ - T(g)> / <r, g>``."""
    if abs(rg_old) < PAIRING_FLOOR:
        return 0.0
    return (rg_new - r_new_tg_old) / rg_old


def beta_hybrid(rg_old: float, rg_new: float, r_new_tg_old: float) -> float:
    """Hybrid ``max(0, min(beta_FR, beta_PRP))``."""
    fr = beta_fr(rg_old, rg_new)
    prp = beta_prp(rg_old, rg_new, r_new_tg_old)
    return max(0.0, min(fr, prp))


def compute_beta(variant: str, rg_old: float, rg_new: float, r_new_tg_old: float | None) -> float:
    if variant == "none":
        return 0.0
    if variant == "fr":
        b = beta_fr(rg_old, rg_new)
    elif variant == "prp":
        b = beta_prp(rg_old, rg_new, r_new_tg_old)
    elif variant == "hybrid":
        b = beta_hybrid(rg_old, rg_new, r_new_tg_old)
    else:
        raise ParameterError(f"unknown CG variant '{variant}'; expected one of {CG_VARIANTS}")
    return b if math.isfinite(b) else 0.0
