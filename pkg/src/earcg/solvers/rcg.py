"""Riemannian conjugate gradient drivers.

:func:`run_rcg_generic` is the template; the gradient rule decides the
metric.  :func:`run_earcg` uses the energy-adaptive gradient with the hybrid
FR-PRP parameter, :func:`run_eargd` the same gradient with ``beta = 0``, and
:func:`run_l2rcg` the residual itself (the L2 Riemannian gradient).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Protocol

from ..blocks import Frame, TangentVector
from ..eametric import DEFAULT_MU, FomConfig, build_shift, ea_gradient, fom_solve
from ..errors import ParameterError, TangencyError
from ..model.ks import KohnShamModel
from ..stiefel import (
    is_on_manifold,
    is_tangent,
    polar_decompose,
    polar_transport,
    project_tangent,
    real_pairing,
    transport,
)
from .cg import CG_VARIANTS, compute_beta
from .linesearch import LineSearchParams, LineSearchResult, secant_linesearch
from .state import PointState, evaluate_point
from .trace import CONVERGED, LINESEARCH_FAIL, MAX_ITERS, IterRecord, SolverTrace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Settings shared by the RCG-type solvers.

    ``res_tol`` applies to the Frobenius norm of the residual over all
    k-blocks.  ``fom_adaptive`` tightens the FOM tolerance to
    ``min(fom.rel_tol, fom_adaptive_scale * ||res||_F^2)`` (floored at 1e-10).
    With ``fallback_gradient``, a state where the energy-adaptive gradient
    fails the angle test ``<r, g> > fallback_cos ||r|| ||g||`` (the shifted
    operator is indefinite far from a minimizer) uses the tangent-projected
    preconditioned residual instead (logged in the trace).
    """

    max_iters: int = 200
    res_tol: float = 1e-8
    mu: float = DEFAULT_MU
    fom: FomConfig = field(default_factory=FomConfig)
    cg_variant: str = "hybrid"
    initial_step: float = 1.0
    linesearch: LineSearchParams = field(default_factory=LineSearchParams)
    precondition: bool = True
    alpha_floor: float = 1e-2
    fom_adaptive: bool = False
    fom_adaptive_scale: float = 1.0
    manifold_tol: float = 1e-9
    growth_warn: float = 10.0
    fallback_gradient: bool = True
    fallback_cos: float = 1e-2
    debug: bool = False

    def __post_init__(self):
        if not self.res_tol > 0:
            raise ParameterError("res_tol must be positive")
        if self.max_iters < 0:
            raise ParameterError("max_iters must be nonnegative")
        if not self.mu > 0:
            raise ParameterError("mu must be positive")
        if not self.initial_step > 0:
            raise ParameterError("initial_step must be positive")
        if self.cg_variant not in CG_VARIANTS:
            raise ParameterError(f"unknown cg_variant '{self.cg_variant}'")
        if not 0 <= self.fallback_cos < 1:
            raise ParameterError("fallback_cos must lie in [0, 1)")


@dataclass
class CGState:
    """Loop state: current point, gradient, direction and cached pairings."""

    point: PointState
    grad: TangentVector
    direction: TangentVector
    rg: float
    r_eta: float
    steepest: bool = True

    @property
    def phi(self) -> Frame:
        return self.point.phi

    @property
    def residual_mat(self):
        return self.point.res


class GradientRule(Protocol):
    name: str

    def __call__(self, model: KohnShamModel, point: PointState, cfg: SolverConfig): ...


class EnergyAdaptiveGradient:
    """Inexact energy-adaptive gradient from a preconditioned FOM solve."""

    name = "energy-adaptive"

    def __call__(self, model, point, cfg):
        mu = cfg.mu
        shift = build_shift(point.lam, mu)
        fcfg = cfg.fom
        if cfg.fom_adaptive:
            tol = min(fcfg.rel_tol, max(cfg.fom_adaptive_scale * point.res_norm**2, 1e-10))
            fcfg = replace(fcfg, rel_tol=tol)
        precond = model.tpa_preconditioner(point.phi, cfg.alpha_floor) if cfg.precondition else None
        # x0 = phi / mu, and H x0 reuses H phi
        out = fom_solve(point.ham, shift, point.phi, point.phi / mu, fcfg, precond, point.hphi / mu)
        if not out.converged:
            log.info(
                "FOM stopped at relative residual %.3e after %d iterations (stagnated=%s)",
                out.rel_residual, out.iterations, out.stagnated,
            )
        grad = ea_gradient(point.phi, out.x)
        info = {"fom_iters": out.iterations, "fom_converged": out.converged, "fallback": False}
        rg = real_pairing(point.res, grad)
        if cfg.fallback_gradient and not rg > cfg.fallback_cos * point.res_norm * grad.norm():
            # shifted operator not coercive here (far from a minimizer)
            log.info("energy-adaptive gradient fails the angle test; using preconditioned residual")
            z = precond(point.res) if precond is not None else point.res
            grad = project_tangent(point.phi, z)
            info["fallback"] = True
        return grad, info


class L2Gradient:
    """The residual itself, i.e. the Riemannian gradient for the L2 metric."""

    name = "l2"

    def __call__(self, model, point, cfg):
        return point.res, {"fom_iters": 0, "fom_converged": True, "fallback": False}


def _line_function(model: KohnShamModel, phi: Frame, eta: TangentVector):
    def f(tau: float):
        q, _, _ = polar_decompose(phi + tau * eta)
        pt = evaluate_point(model, q)
        t_eta = polar_transport(phi, tau, eta)
        return pt.energy, real_pairing(pt.res, t_eta), (pt, t_eta)

    return f


def run_rcg_generic(
    model: KohnShamModel,
    phi0: Frame,
    cfg: SolverConfig,
    gradient_rule: GradientRule,
    name: str = "rcg",
    cg_variant: str | None = None,
    callback=None,
):
    """Riemannian CG with a pluggable gradient.

    Returns ``(phi, trace)``.  Each iteration costs one Hamiltonian
    application per line-search trial (residual and slope share it), plus
    whatever the gradient rule spends; the accepted trial is reused.
    ``callback(iteration, point_state)`` is invoked for every iterate.
    """
    variant = cfg.cg_variant if cg_variant is None else cg_variant
    if variant not in CG_VARIANTS:
        raise ParameterError(f"unknown CG variant '{variant}'")
    if not is_on_manifold(phi0, max(cfg.manifold_tol, 1e-10)):
        raise ParameterError("initial frame is not orthonormal")

    counter = model.counter
    base_apps, base_cols, _ = counter.snapshot()
    t0 = time.monotonic()
    trace = SolverTrace(name, phi0.ncols, len(phi0))

    def record(it, pt, **kw):
        apps, cols, _ = counter.snapshot()
        trace.append(
            IterRecord(
                iter=it,
                energy=pt.energy,
                res_fro=pt.res_norm,
                ham_applies=apps - base_apps,
                columns_applied=cols - base_cols,
                wall_s=time.monotonic() - t0,
                **kw,
            )
        )

    def gradient(pt, at: int):
        g, info = gradient_rule(model, pt, cfg)
        if info.get("fallback"):
            trace.messages.append(f"iter {at}: gradient fallback (non-coercive shift)")
        if cfg.debug and not is_tangent(pt.phi, g, 1e-8):
            raise TangencyError(f"{gradient_rule.name} gradient is not tangent at the iterate")
        return g, info

    pt = evaluate_point(model, phi0)
    record(0, pt)
    if callback is not None:
        callback(0, pt)
    if pt.res_norm <= cfg.res_tol:
        trace.status = CONVERGED
        return pt.phi, trace

    g, _ = gradient(pt, 0)
    rg = real_pairing(pt.res, g)
    state = CGState(pt, g, -g, rg, -rg, steepest=True)
    tau_prev = cfg.initial_step
    fails = 0

    def search(st: CGState) -> LineSearchResult:
        f = _line_function(model, st.phi, st.direction)
        return secant_linesearch(f, st.point.energy, st.r_eta, cfg.linesearch, tau_prev)

    def to_steepest(st: CGState, why: str):
        log.info("%s: restart with steepest descent at iteration %d (%s)", name, it, why)
        trace.messages.append(f"iter {it}: steepest-descent restart ({why})")
        st.direction = -st.grad
        st.r_eta = -st.rg
        st.steepest = True

    status = MAX_ITERS
    for it in range(cfg.max_iters):
        restarted = False
        state.r_eta = real_pairing(state.point.res, state.direction)
        if not state.r_eta < 0 and not state.steepest:
            to_steepest(state, "not a descent direction")
            restarted = True
        if not state.r_eta < 0:
            trace.messages.append(f"iter {it}: gradient pairing <r, g> = {state.rg:.3e} is not positive")
            status = LINESEARCH_FAIL
            break

        ls = search(state)
        terminate = False
        if ls.ok:
            fails = 0
        else:
            fails += 1
            decreased = ls.point.tau > 0 and ls.point.energy < state.point.energy
            if decreased and fails < 2:
                trace.messages.append(f"iter {it}: line search failed, best sampled step accepted")
            elif not state.steepest:
                to_steepest(state, "line search failed")
                restarted = True
                ls = search(state)
                if ls.ok:
                    fails = 0
                else:
                    terminate = True
            else:
                terminate = True
            if terminate and not (ls.point.tau > 0 and ls.point.energy < state.point.energy):
                trace.messages.append(f"iter {it}: line search failed without decrease")
                status = LINESEARCH_FAIL
                break

        tau = ls.point.tau
        new_pt, t_eta = ls.point.payload
        if not is_on_manifold(new_pt.phi, cfg.manifold_tol):
            log.warning("%s: iterate %d drifted off the manifold", name, it + 1)
        g_new, info = gradient(new_pt, it + 1)
        rg_new = real_pairing(new_pt.res, g_new)
        r_tg = None
        if variant in ("prp", "hybrid"):
            r_tg = real_pairing(new_pt.res, transport(state.phi, tau * state.direction, state.grad))
        beta = compute_beta(variant, state.rg, rg_new, r_tg)

        grow = t_eta.norm() / max(state.direction.norm(), 1e-300)
        if grow > cfg.growth_warn:
            log.warning("%s: transported direction grew by %.1fx at iteration %d", name, grow, it + 1)

        record(
            it + 1,
            new_pt,
            tau=tau,
            beta=beta,
            energy_prev=state.point.energy,
            slope0=state.r_eta,
            slope_new=ls.point.slope,
            wolfe_ok=ls.ok,
            restart=restarted,
            fom_iters=info["fom_iters"],
            fom_converged=info["fom_converged"],
        )
        direction = -g_new + beta * t_eta if beta != 0.0 else -g_new
        state = CGState(new_pt, g_new, direction, rg_new, math.nan, steepest=(beta == 0.0))
        tau_prev = tau
        if callback is not None:
            callback(it + 1, new_pt)
        if new_pt.res_norm <= cfg.res_tol:
            status = CONVERGED
            break
        if terminate:
            status = LINESEARCH_FAIL
            break

    trace.status = status
    return state.phi, trace


def run_earcg(model: KohnShamModel, phi0: Frame, cfg: SolverConfig = SolverConfig(), callback=None):
    """Energy-adaptive Riemannian CG."""
    return run_rcg_generic(model, phi0, cfg, EnergyAdaptiveGradient(), "earcg", callback=callback)


def run_eargd(model: KohnShamModel, phi0: Frame, cfg: SolverConfig = SolverConfig(), callback=None):
    """Energy-adaptive Riemannian gradient descent (``beta = 0``), same line search."""
    return run_rcg_generic(
        model, phi0, cfg, EnergyAdaptiveGradient(), "eargd", cg_variant="none", callback=callback
    )


def run_l2rcg(model: KohnShamModel, phi0: Frame, cfg: SolverConfig = SolverConfig(), callback=None):
    """Unpreconditioned RCG with the residual as gradient."""
    return run_rcg_generic(model, phi0, cfg, L2Gradient(), "l2rcg", callback=callback)
