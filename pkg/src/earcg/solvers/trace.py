"""Per-iteration solver records."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

CONVERGED = "converged"
MAX_ITERS = "max_iters"
LINESEARCH_FAIL = "linesearch_fail"
STAGNATION = "stagnation"
STATUSES = (CONVERGED, MAX_ITERS, LINESEARCH_FAIL, STAGNATION)


@dataclass
class IterRecord:
    """One iteration.

    ``ham_applies`` and ``columns_applied`` are cumulative since the start
    of the run.  ``energy_prev``, ``slope0`` and ``slope_new`` certify the
    approximate Wolfe conditions of the step that produced this iterate.
    """

    iter: int
    energy: float
    res_fro: float
    ham_applies: int
    wall_s: float
    tau: float = 0.0
    beta: float = 0.0
    columns_applied: int = 0
    energy_prev: float = math.nan
    slope0: float = math.nan
    slope_new: float = math.nan
    wolfe_ok: bool = True
    restart: bool = False
    fom_iters: int = 0
    fom_converged: bool = True


@dataclass
class SolverTrace:
    solver: str
    p: int
    nblocks: int = 1
    records: list[IterRecord] = field(default_factory=list)
    status: str = MAX_ITERS
    messages: list[str] = field(default_factory=list)

    def append(self, rec: IterRecord):
        if self.records:
            last = self.records[-1]
            if rec.iter <= last.iter:
                raise ValueError("trace iterations must increase strictly")
            if rec.ham_applies < last.ham_applies:
                raise ValueError("Hamiltonian application count decreased")
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    @property
    def iterations(self) -> int:
        return self.records[-1].iter if self.records else 0

    @property
    def final(self) -> IterRecord:
        return self.records[-1]

    @property
    def per_band_factor(self) -> int:
        """Columns in one full-frame application (``p`` times the k-block count)."""
        return self.p * self.nblocks

    @property
    def energies(self) -> list[float]:
        return [r.energy for r in self.records]

    @property
    def residuals(self) -> list[float]:
        return [r.res_fro for r in self.records]

    def first_crossing(self, threshold: float) -> IterRecord | None:
        """First record with ``res_fro <= threshold``."""
        for r in self.records:
            if r.res_fro <= threshold:
                return r
        return None
