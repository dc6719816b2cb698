from .config import (
    SOLVER_NAMES,
    ExperimentConfig,
    InitConfig,
    ModelConfig,
    PotentialConfig,
    SolverSection,
    dump_config,
    load_config,
    parse_config,
)
from .experiment import ExperimentResult, run_experiment
from .models import BUILTIN_MODELS, build_model, frame_hash, shared_init
from .output import CSV_HEADER, CsvSchemaError, parse_trace_csv, read_trace_csv, write_trace_csv
from .summary import decades, format_summary, summarize

__all__ = [
    "BUILTIN_MODELS", "CSV_HEADER", "CsvSchemaError", "ExperimentConfig", "ExperimentResult",
    "InitConfig", "ModelConfig", "PotentialConfig", "SOLVER_NAMES", "SolverSection",
    "build_model", "decades", "dump_config", "format_summary", "frame_hash", "load_config",
    "parse_config", "parse_trace_csv", "read_trace_csv", "run_experiment", "shared_init",
    "summarize", "write_trace_csv",
]
