"""Experiment configuration: TOML text <-> validated pydantic models."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..eametric import FomConfig
from ..errors import ConfigError, ParameterError
from ..solvers.linesearch import LineSearchParams
from ..solvers.rcg import SolverConfig
from ..solvers.scf import ScfConfig

SOLVER_NAMES = ("earcg", "eargd", "l2rcg", "scf")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PotentialConfig(_Strict):
    kind: Literal["cosine-well", "double-well", "random-smooth", "zero"] = "cosine-well"
    depth: float = 1.0
    width: Optional[float] = None
    bias: Optional[float] = None
    modes: Optional[int] = None
    seed: Optional[int] = None

    def params(self) -> dict:
        keep = {"cosine-well": ("depth",), "double-well": ("depth", "width", "bias"),
                "random-smooth": ("depth", "modes", "seed"), "zero": ()}[self.kind]
        return {k: getattr(self, k) for k in keep if getattr(self, k) is not None}


class ModelConfig(_Strict):
    """``builtin`` names a reference model; any other field set here overrides it."""

    builtin: Optional[str] = None
    lengths: Optional[list[float]] = None
    ecut: Optional[float] = None
    grid: Optional[list[int]] = None
    kpoints: Optional[list[list[float]]] = None
    p: Optional[int] = Field(default=None, ge=1)
    kappa: Optional[float] = Field(default=None, ge=0)
    c_x: Optional[float] = Field(default=None, le=0)
    hartree: Optional[bool] = None
    potential: Optional[PotentialConfig] = None


class InitConfig(_Strict):
    rule: Literal["scf", "random"] = "scf"
    tol_density: float = Field(default=0.1, gt=0)
    mixing_alpha: float = Field(default=0.1, gt=0, le=1)
    max_iters: int = Field(default=200, ge=1)


class SolverSection(_Strict):
    """Per-solver overrides; unset fields keep library defaults."""

    max_iters: Optional[int] = Field(default=None, ge=0)
    res_tol: Optional[float] = Field(default=None, gt=0)
    mu: Optional[float] = Field(default=None, gt=0)
    cg_variant: Optional[Literal["fr", "prp", "hybrid", "none"]] = None
    initial_step: Optional[float] = Field(default=None, gt=0)
    precondition: Optional[bool] = None
    alpha_floor: Optional[float] = Field(default=None, gt=0)
    fom_rel_tol: Optional[float] = Field(default=None, gt=0, lt=1)
    fom_max_block_iters: Optional[int] = Field(default=None, ge=1)
    fom_qr_drop_tol: Optional[float] = Field(default=None, gt=0)
    fom_adaptive: Optional[bool] = None
    delta: Optional[float] = None
    sigma_ls: Optional[float] = None
    gamma: Optional[float] = None
    epsilon: Optional[float] = None
    max_ls_iters: Optional[int] = Field(default=None, ge=1)
    bisect_ratio: Optional[float] = Field(default=None, gt=0, lt=1)
    secant_guard: Optional[bool] = None
    fallback_gradient: Optional[bool] = None
    fallback_cos: Optional[float] = Field(default=None, ge=0, lt=1)
    manifold_tol: Optional[float] = Field(default=None, gt=0)
    debug: Optional[bool] = None
    # SCF only
    mixing_alpha: Optional[float] = Field(default=None, gt=0, le=1)
    tol_density: Optional[float] = Field(default=None, gt=0)

    def _set(self, names) -> dict:
        return {n: getattr(self, n) for n in names if getattr(self, n) is not None}

    def solver_config(self) -> SolverConfig:
        fom = FomConfig(**{k[4:]: v for k, v in self._set(
            ("fom_rel_tol", "fom_max_block_iters", "fom_qr_drop_tol")).items()})
        ls_kw = self._set(("delta", "sigma_ls", "gamma", "epsilon", "max_ls_iters", "bisect_ratio"))
        if self.secant_guard is False:
            ls_kw["bisect_ratio"] = None
        ls = LineSearchParams(**ls_kw)
        top = self._set(("max_iters", "res_tol", "mu", "cg_variant", "initial_step", "precondition",
                         "alpha_floor", "fom_adaptive", "fallback_gradient", "fallback_cos",
                         "manifold_tol", "debug"))
        return SolverConfig(fom=fom, linesearch=ls, **top)

    def scf_config(self) -> ScfConfig:
        kw = self._set(("mixing_alpha", "tol_density", "max_iters", "res_tol"))
        kw.setdefault("res_tol", SolverConfig().res_tol)
        return ScfConfig(**kw)


class ExperimentConfig(_Strict):
    model: ModelConfig
    init: InitConfig = InitConfig()
    solver: dict[str, SolverSection]
    seed: int = 42
    output: str = "results"

    @field_validator("solver")
    @classmethod
    def _known_solvers(cls, v):
        if not v:
            raise ValueError("at least one [solver.<name>] section is required")
        bad = [k for k in v if k not in SOLVER_NAMES]
        if bad:
            raise ValueError(f"unknown solver(s) {bad}; expected names from {SOLVER_NAMES}")
        return v

    @model_validator(mode="after")
    def _check_model(self):
        if self.model.builtin is None and (self.model.lengths is None or self.model.ecut is None):
            raise ValueError("[model] needs either 'builtin' or both 'lengths' and 'ecut'")
        for name, sec in self.solver.items():
            try:
                sec.scf_config() if name == "scf" else sec.solver_config()
            except ParameterError as exc:
                raise ValueError(f"solver.{name}: {exc}") from exc
        return self

    def solver_names(self) -> list[str]:
        return list(self.solver)

    def to_dict(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)

    def config_hash(self) -> str:
        """SHA-256 over the canonical JSON form, ignoring the output location."""
        d = self.to_dict()
        d.pop("output", None)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"])
        lines.append(f"  field '{loc}': {e['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc
    raw.setdefault("solver", {})
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())
