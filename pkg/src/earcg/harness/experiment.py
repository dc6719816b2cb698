"""Run one configured experiment end to end."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError, EarcgError
from ..solvers import run_eargd, run_earcg, run_l2rcg, run_scf
from ..solvers.trace import SolverTrace
from .config import ExperimentConfig, dump_config
from .models import build_model, frame_hash, shared_init
from .output import write_trace_csv
from .summary import format_summary, summarize

log = logging.getLogger(__name__)

RCG_RUNNERS = {"earcg": run_earcg, "eargd": run_eargd, "l2rcg": run_l2rcg}


@dataclass
class ExperimentResult:
    out_dir: Path
    traces: dict[str, SolverTrace | None]
    summary: dict
    csv_paths: dict[str, Path] = field(default_factory=dict)
    init_hash: str = ""
    config_hash: str = ""


def _with_overrides(cfg: ExperimentConfig, seed=None, solvers=None) -> ExperimentConfig:
    upd = {}
    if seed is not None:
        upd["seed"] = int(seed)
    if solvers:
        unknown = [s for s in solvers if s not in cfg.solver]
        if unknown:
            raise ConfigError(f"--solvers names {unknown} not configured; available {list(cfg.solver)}")
        upd["solver"] = {k: v for k, v in cfg.solver.items() if k in solvers}
    return cfg.model_copy(update=upd) if upd else cfg


def run_experiment(cfg: ExperimentConfig, out_dir=None, seed=None, solvers=None) -> ExperimentResult:
    """Build the model, compute the shared initial frame, run every solver, write outputs.

    Solver failures are recorded in the summary; only harness-level faults
    (configuration, I/O) raise.
    """
    cfg = _with_overrides(cfg, seed, solvers)
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()

    built = build_model(cfg.model)
    model = built.model
    phi0, _ = shared_init(model, built.p, cfg.init, cfg.seed)
    h0 = frame_hash(phi0)

    traces: dict[str, SolverTrace | None] = {}
    errors: dict[str, str] = {}
    res_tol = None
    for name, sec in cfg.solver.items():
        try:
            if name == "scf":
                scfg = sec.scf_config()
                _, tr = run_scf(model, phi0, scfg)
                res_tol = res_tol or scfg.res_tol
            else:
                scfg = sec.solver_config()
                _, tr = RCG_RUNNERS[name](model, phi0, scfg)
                res_tol = res_tol or scfg.res_tol
            traces[name] = tr
        except EarcgError as exc:
            log.error("solver %s failed: %s", name, exc)
            traces[name] = None
            errors[name] = f"{type(exc).__name__}: {exc}"
        if frame_hash(phi0) != h0:
            raise RuntimeError(f"solver {name} modified the shared initial frame")

    paths = {}
    for name, tr in traces.items():
        if tr is not None:
            paths[name] = write_trace_csv(out / f"{name}.csv", tr, chash)
    summary = summarize(traces, res_tol or 1e-8, errors)
    summary["config_hash"] = chash
    summary["init_frame_hash"] = h0
    summary["seed"] = cfg.seed
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    (out / "summary.txt").write_text(format_summary(summary))
    (out / "config.toml").write_text(dump_config(cfg))
    return ExperimentResult(out, traces, summary, paths, h0, chash)
