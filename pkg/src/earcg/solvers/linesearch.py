"""Modified secant step-size search under approximate Wolfe conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

from ..errors import ParameterError

LS_OK = "ok"
LS_FAIL = "linesearch_fail"
LS_NOT_DESCENT = "not_descent"


@dataclass(frozen=True)
class LineSearchParams:
    """Parameters of the secant search.

    ``0 < delta < 1/2``, ``delta < sigma_ls < 1``, ``0 < gamma < 1`` and a
    small ``epsilon > 0`` that tolerates round-off in the energy.
    """

    delta: float = 0.05
    sigma_ls: float = 0.1
    gamma: float = 0.5
    epsilon: float = 1e-12
    max_ls_iters: int = 30
    degenerate_tol: float = 1e-14
    bisect_ratio: float | None = 2.0 / 3.0

    def __post_init__(self):
        if not 0 < self.delta < 0.5:
            raise ParameterError(f"delta must lie in (0, 1/2), got {self.delta}")
        if not self.delta < self.sigma_ls < 1:
            raise ParameterError(f"sigma_ls must lie in (delta, 1), got {self.sigma_ls}")
        if not 0 < self.gamma < 1:
            raise ParameterError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0 < self.epsilon < 1e-3:
            raise ParameterError(f"epsilon must be small and positive, got {self.epsilon}")
        if self.max_ls_iters < 1:
            raise ParameterError("max_ls_iters must be >= 1")
        if self.bisect_ratio is not None and not 0 < self.bisect_ratio < 1:
            raise ParameterError(f"bisect_ratio must lie in (0, 1), got {self.bisect_ratio}")

    @property
    def curvature_factor(self) -> float:
        return min(self.sigma_ls, 1 - 2 * self.delta)


@dataclass
class LinePoint:
    tau: float
    energy: float
    slope: float
    payload: Any = None


@dataclass
class LineSearchResult:
    point: LinePoint
    status: str
    evaluations: int
    samples: list[LinePoint] = field(default_factory=list)

    @property
    def tau(self) -> float:
        return self.point.tau

    @property
    def ok(self) -> bool:
        return self.status == LS_OK


def energy_ok(f: float, f0: float, eps: float) -> bool:
    # relative tolerance on |f0| so negative energies are not forced to strictly decrease
    return f <= f0 + eps * abs(f0)


def approx_wolfe_ok(f: float, df: float, f0: float, df0: float, params: LineSearchParams) -> bool:
    """Both approximate Wolfe inequalities at a trial point."""
    return energy_ok(f, f0, params.epsilon) and abs(df) <= params.curvature_factor * abs(df0)


def _as_point(tau: float, value) -> LinePoint:
    if isinstance(value, LinePoint):
        return value
    if len(value) == 2:
        return LinePoint(tau, float(value[0]), float(value[1]))
    return LinePoint(tau, float(value[0]), float(value[1]), value[2])


def secant_linesearch(
    f_eval: Callable[[float], Any],
    f0: float,
    df0: float,
    params: LineSearchParams = LineSearchParams(),
    tau_init: float = 1.0,
) -> LineSearchResult:
    """Find ``tau`` with ``f(tau) <= f(0) + eps|f(0)|`` and ``|f'(tau)| <= min(sigma, 1-2 delta)|f'(0)|``.

    ``f_eval(tau)`` returns ``(f, f')`` or ``(f, f', payload)``.  The initial
    guess is tested first; afterwards each trial comes from a secant step on
    the current interval ``[a, b]``, with interval shrinking when the step is
    too large and growth when the secant points left of ``a``.  When an
    update inside the bracket shrinks it by less than ``params.bisect_ratio``
    the next trial is the midpoint (``bisect_ratio=None`` disables this).

    On exhausting ``params.max_ls_iters`` evaluations the lowest-energy
    sample (``tau = 0`` included) is returned with status ``linesearch_fail``.
    """
    if not tau_init > 0:
        raise ParameterError(f"tau_init must be positive, got {tau_init}")
    origin = LinePoint(0.0, float(f0), float(df0))
    if not df0 < 0:
        return LineSearchResult(origin, LS_NOT_DESCENT, 0, [origin])

    samples = [origin]

    def evaluate(t: float) -> LinePoint:
        pt = _as_point(t, f_eval(t))
        samples.append(pt)
        return pt

    def finish(pt: LinePoint, status: str) -> LineSearchResult:
        return LineSearchResult(pt, status, len(samples) - 1, samples)

    def wolfe(pt: LinePoint) -> bool:
        return math.isfinite(pt.energy) and approx_wolfe_ok(pt.energy, pt.slope, f0, df0, params)

    a = origin
    b = cur = evaluate(tau_init)
    bisect = False
    while not wolfe(cur):
        if len(samples) - 1 >= params.max_ls_iters:
            best = min(samples, key=lambda s: (s.energy if math.isfinite(s.energy) else math.inf, -s.tau))
            return finish(best, LS_FAIL)
        denom = b.slope - a.slope
        if bisect or not math.isfinite(b.slope) or abs(denom) <= params.degenerate_tol * max(abs(a.slope), abs(b.slope)):
            t = 0.5 * (a.tau + b.tau)
        else:
            t = (a.tau * b.slope - b.tau * a.slope) / denom
            if not math.isfinite(t):
                t = 0.5 * (a.tau + b.tau)
        if t <= 0.0:
            # left of the origin: treat as "too small"
            cur = evaluate(b.tau / params.gamma)
            a, b = origin, cur
            bisect = False
            continue
        cur = evaluate(t)
        too_big = not math.isfinite(cur.energy) or not energy_ok(cur.energy, f0, params.epsilon)
        if too_big and cur.slope < 0:
            cur = evaluate(params.gamma * b.tau)
            a, b = origin, cur
        elif t < a.tau:
            cur = evaluate(b.tau / params.gamma)
            a, b = origin, cur
        elif t > b.tau:
            a, b = b, cur
        else:
            width = b.tau - a.tau
            if cur.slope >= 0 or too_big:
                # f' changes sign in [a, t]
                b = cur
            else:
                a = cur
            # one-sided secant updates can stall; guard with a midpoint step
            bisect = params.bisect_ratio is not None and b.tau - a.tau > params.bisect_ratio * width
            continue
        bisect = False
    return finish(cur, LS_OK)
