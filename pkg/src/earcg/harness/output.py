"""Trace CSV serialization.

Schema: the header line ``iter,energy_ha,res_fro,ham_applies,wall_s,tau,beta``,
one row per iteration, then ``# config_hash=<hex>`` and ``# status=<status>``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

from ..solvers.trace import STATUSES, SolverTrace

CSV_HEADER = ("iter", "energy_ha", "res_fro", "ham_applies", "wall_s", "tau", "beta")
HEADER_LINE = ",".join(CSV_HEADER)


class CsvSchemaError(ValueError):
    """A trace CSV does not follow the documented schema."""


def _num(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in trace")
    return repr(float(x))


def trace_to_csv(trace: SolverTrace, config_hash: str) -> str:
    out = io.StringIO()
    out.write(HEADER_LINE + "\n")
    for r in trace.records:
        row = [
            str(r.iter), _num(r.energy), _num(r.res_fro), str(r.ham_applies),
            f"{r.wall_s:.6f}", _num(r.tau), _num(r.beta),
        ]
        out.write(",".join(row) + "\n")
    out.write(f"# config_hash={config_hash}\n")
    out.write(f"# status={trace.status}\n")
    return out.getvalue()


def write_trace_csv(path, trace: SolverTrace, config_hash: str) -> Path:
    path = Path(path)
    path.write_text(trace_to_csv(trace, config_hash))
    return path


@dataclass
class ParsedTrace:
    rows: list[dict]
    config_hash: str
    status: str


def parse_trace_csv(text: str) -> ParsedTrace:
    """Strict reader; raises :class:`CsvSchemaError` on any deviation."""
    lines = text.splitlines()
    if not lines or lines[0] != HEADER_LINE:
        raise CsvSchemaError(f"header must be exactly '{HEADER_LINE}'")
    body = [l for l in lines[1:] if not l.startswith("#")]
    footer = [l for l in lines[1:] if l.startswith("#")]
    meta = {}
    for l in footer:
        key, _, val = l[1:].strip().partition("=")
        meta[key] = val
    if "config_hash" not in meta or "status" not in meta:
        raise CsvSchemaError("missing config_hash/status footer")
    if meta["status"] not in STATUSES:
        raise CsvSchemaError(f"unknown status {meta['status']!r}")
    rows = []
    last = -1
    for rec in csv.reader(body):
        if len(rec) != len(CSV_HEADER):
            raise CsvSchemaError(f"row has {len(rec)} fields, expected {len(CSV_HEADER)}")
        row = {"iter": int(rec[0]), "ham_applies": int(rec[3])}
        for name, val in zip(CSV_HEADER, rec):
            if name not in row:
                row[name] = float(val)
                if not math.isfinite(row[name]):
                    raise CsvSchemaError(f"non-finite {name}")
        if row["iter"] <= last:
            raise CsvSchemaError("iter column must increase")
        last = row["iter"]
        rows.append(row)
    return ParsedTrace(rows, meta["config_hash"], meta["status"])


def read_trace_csv(path) -> ParsedTrace:
    return parse_trace_csv(Path(path).read_text())


def strip_wall_time(text: str) -> str:
    """CSV text with the wall-time column blanked (for determinism checks)."""
    idx = CSV_HEADER.index("wall_s")
    out = []
    for line in text.splitlines():
        if line.startswith("#") or line == HEADER_LINE:
            out.append(line)
            continue
        parts = line.split(",")
        parts[idx] = ""
        out.append(",".join(parts))
    return "\n".join(out) + "\n"
