"""Built-in reference models and the shared initial guess."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from ..blocks import Frame
from ..errors import ConfigError
from ..model import KohnShamModel, PlaneWaveBasis, build_potential
from ..solvers.scf import ScfConfig, run_scf
from ..solvers.trace import CONVERGED
from ..stiefel import random_frame
from .config import InitConfig, ModelConfig

log = logging.getLogger(__name__)

# fields mirror ModelConfig; "potential" mirrors PotentialConfig
BUILTIN_MODELS: dict[str, dict] = {
    "gp-1d": {
        "description": "1D Gross-Pitaevskii-type, cosine well, n=63 modes, p=2, kappa=10",
        "lengths": [2 * np.pi], "ecut": 480.5, "grid": [128], "p": 2,
        "kappa": 10.0, "c_x": 0.0, "hartree": False,
        "potential": {"kind": "cosine-well", "depth": 10.0},
    },
    "stiff-1d": {
        "description": "1D double well with small gap and high cutoff (n=285, p=2)",
        "lengths": [20.0], "ecut": 1000.0, "p": 2,
        "kappa": 4.0, "c_x": 0.0, "hartree": False,
        "potential": {"kind": "double-well", "depth": 1.5, "width": 1.5, "bias": 0.0},
    },
    "gp-3d-smoke": {
        "description": "3D smoke test on a 16^3 grid, Hartree and exchange on, p=4 (closed shell)",
        "lengths": [2 * np.pi] * 3, "ecut": 8.0, "grid": [16, 16, 16], "p": 4,
        "kappa": 1.0, "c_x": -0.5, "hartree": True,
        "potential": {"kind": "cosine-well", "depth": 4.0},
    },
    "si-analog-1d": {
        "description": "1D periodic solid analogue: Hartree + exchange, 2 k-blocks, p=4",
        "lengths": [10.26], "ecut": 40.0, "kpoints": [[0.0], [0.5]], "p": 4,
        "kappa": 0.0, "c_x": -0.7386, "hartree": True,
        "potential": {"kind": "random-smooth", "depth": 3.0, "modes": 3, "seed": 7},
    },
}


@dataclass
class BuiltModel:
    model: KohnShamModel
    p: int
    spec: dict


def resolve_model_spec(cfg: ModelConfig) -> dict:
    """Merge a built-in definition with explicit overrides from the config."""
    spec: dict = {}
    if cfg.builtin is not None:
        if cfg.builtin not in BUILTIN_MODELS:
            raise ConfigError(
                f"unknown builtin model '{cfg.builtin}'; available: {sorted(BUILTIN_MODELS)}"
            )
        spec = {k: v for k, v in BUILTIN_MODELS[cfg.builtin].items() if k != "description"}
        spec["potential"] = dict(spec["potential"])
    for name in ("lengths", "ecut", "grid", "kpoints", "p", "kappa", "c_x", "hartree"):
        val = getattr(cfg, name)
        if val is not None:
            spec[name] = val
    if cfg.potential is not None:
        spec["potential"] = cfg.potential.model_dump(exclude_none=True)
    spec.setdefault("p", 1)
    spec.setdefault("potential", {"kind": "zero"})
    return spec


def build_model(cfg: ModelConfig) -> BuiltModel:
    from .config import PotentialConfig

    spec = resolve_model_spec(cfg)
    try:
        basis = PlaneWaveBasis.create(
            spec["lengths"], spec["ecut"], grid=spec.get("grid"), kpoints=spec.get("kpoints")
        )
        pot = PotentialConfig(**spec["potential"])
        v_ion = build_potential(basis, pot.kind, **pot.params())
        model = KohnShamModel(
            basis,
            v_ion,
            kappa=spec.get("kappa", 0.0),
            c_x=spec.get("c_x", 0.0),
            hartree=spec.get("hartree", False),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid model definition: {exc}") from exc
    p = int(spec["p"])
    if p > min(basis.sizes):
        raise ConfigError(f"p={p} exceeds the basis size {min(basis.sizes)}")
    return BuiltModel(model, p, spec)


def frame_hash(phi: Frame) -> str:
    h = hashlib.sha256()
    for b in phi:
        h.update(np.ascontiguousarray(b).tobytes())
    return h.hexdigest()


def shared_init(model: KohnShamModel, p: int, init: InitConfig, seed: int):
    """Seeded random orthonormal frame, optionally refined by a loose SCF.

    Returns ``(phi0, trace_or_None)``.  If the SCF initializer does not reach
    its density threshold the raw random frame is returned.
    """
    rng = np.random.default_rng(seed)
    phi = random_frame(rng, model.shapes(p))
    if init.rule == "random":
        return phi, None
    cfg = ScfConfig(
        mixing_alpha=init.mixing_alpha, tol_density=init.tol_density, max_iters=init.max_iters
    )
    refined, trace = run_scf(model, phi, cfg)
    if trace.status != CONVERGED:
        log.warning("SCF initializer ended with status %s; using the random frame", trace.status)
        return phi, trace
    return refined, trace


def describe_models() -> str:
    width = max(len(k) for k in BUILTIN_MODELS)
    return "\n".join(f"{k:<{width}}  {v['description']}" for k, v in BUILTIN_MODELS.items())


__all__ = [
    "BUILTIN_MODELS", "BuiltModel", "build_model", "describe_models",
    "frame_hash", "resolve_model_spec", "shared_init",
]
