"""Decade-crossing comparison tables across solver traces."""

from __future__ import annotations

import math

from ..solvers.trace import SolverTrace

LABELS = {"scf": "scf (plain damped mixing)"}


def decades(res_tol: float, start: float = 1e-2) -> list[float]:
    """Thresholds ``1e-2, 1e-3, ...`` down to ``res_tol`` (included)."""
    out = []
    e = int(round(math.log10(start)))
    while 10.0**e >= res_tol * (1 + 1e-12):
        out.append(10.0**e)
        e -= 1
    if not out or not math.isclose(out[-1], res_tol, rel_tol=1e-12):
        out.append(res_tol)
    return out


def _crossing(trace: SolverTrace, thr: float):
    rec = trace.first_crossing(thr)
    if rec is None:
        return None
    return {
        "iter": rec.iter,
        "ham_applies": rec.ham_applies,
        "per_band": rec.columns_applied / trace.per_band_factor,
        "wall_s": rec.wall_s,
    }


def summarize(traces: dict[str, SolverTrace | None], res_tol: float, errors: dict | None = None) -> dict:
    """Machine-readable summary.

    ``traces[name]`` may be ``None`` for a solver that raised; its message
    goes in ``errors[name]``.  Ratios are cumulative Hamiltonian applications
    relative to EARCG at each threshold, present only when EARCG ran and
    more than one solver is listed.
    """
    errors = errors or {}
    thresholds = decades(res_tol)
    solvers = {}
    for name, tr in traces.items():
        if tr is None:
            solvers[name] = {"label": LABELS.get(name, name), "failed": True,
                             "error": errors.get(name, ""), "crossings": {}}
            continue
        fin = tr.final
        solvers[name] = {
            "label": LABELS.get(name, name),
            "failed": tr.status != "converged",
            "status": tr.status,
            "iterations": tr.iterations,
            "ham_applies": fin.ham_applies,
            "ham_applies_per_band": fin.columns_applied / tr.per_band_factor,
            "wall_s": fin.wall_s,
            "final_energy": fin.energy,
            "final_res_fro": fin.res_fro,
            "crossings": {f"{t:.0e}": _crossing(tr, t) for t in thresholds},
        }
    ratios = {}
    ref = traces.get("earcg")
    if ref is not None and len(traces) > 1:
        for name, tr in traces.items():
            if name == "earcg" or tr is None:
                continue
            row = {}
            for t in thresholds:
                a, b = tr.first_crossing(t), ref.first_crossing(t)
                row[f"{t:.0e}"] = (a.ham_applies / b.ham_applies) if a and b and b.ham_applies else None
            ratios[name] = row
    return {"res_tol": res_tol, "thresholds": [f"{t:.0e}" for t in thresholds],
            "solvers": solvers, "ratios_vs_earcg": ratios}


def format_summary(summary: dict) -> str:
    th = summary["thresholds"]
    lines = ["solver                     status           iters   H-apps  H/band   wall_s   energy_ha"]
    for name, s in summary["solvers"].items():
        if "status" not in s:
            lines.append(f"{s['label']:<26} FAILED: {s['error']}")
            continue
        lines.append(
            f"{s['label']:<26} {s['status']:<15} {s['iterations']:>6} {s['ham_applies']:>8} "
            f"{s['ham_applies_per_band']:>7.1f} {s['wall_s']:>8.3f}   {s['final_energy']:.12f}"
        )
    lines.append("")
    lines.append("cumulative H applications at first crossing of ||res||_F <= threshold")
    lines.append("solver                     " + "".join(f"{t:>9}" for t in th))
    for name, s in summary["solvers"].items():
        cells = []
        for t in th:
            c = s["crossings"].get(t)
            cells.append(f"{c['ham_applies']:>9d}" if c else f"{'':>9}")
        lines.append(f"{s['label']:<26} " + "".join(cells))
    if summary["ratios_vs_earcg"]:
        lines.append("")
        lines.append("ratio of H applications vs earcg")
        for name, row in summary["ratios_vs_earcg"].items():
            cells = [f"{row[t]:>9.2f}" if row[t] is not None else f"{'':>9}" for t in th]
            lines.append(f"{LABELS.get(name, name):<26} " + "".join(cells))
    return "\n".join(lines) + "\n"
