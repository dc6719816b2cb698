"""Shared fixtures: small models and a cached gp-1d EARCG trajectory."""

from __future__ import annotations

import time

import numpy as np
import pytest

from earcg.harness.config import InitConfig, ModelConfig
from earcg.harness.models import build_model, shared_init
from earcg.model import KohnShamModel, PlaneWaveBasis, build_potential
from earcg.solvers import SolverConfig, run_earcg


def small_model(n_len=2 * np.pi, ecut=40.0, kappa=2.0, depth=3.0, kpoints=None, hartree=False, c_x=0.0):
    basis = PlaneWaveBasis.create([n_len], ecut, kpoints=kpoints)
    v = build_potential(basis, "cosine-well", depth=depth)
    return KohnShamModel(basis, v, kappa=kappa, c_x=c_x, hartree=hartree)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def gp1d():
    built = build_model(ModelConfig(builtin="gp-1d"))
    phi0, _ = shared_init(built.model, built.p, InitConfig(), 42)
    return built.model, built.p, phi0


@pytest.fixture(scope="session")
def gp1d_trajectory(gp1d):
    """Every iterate of an EARCG run on gp-1d down to a very small residual.

    Returns ``(states, trace, seconds)``.
    """
    model, _, phi0 = gp1d
    states = []
    t0 = time.perf_counter()
    phi, trace = run_earcg(
        model, phi0, SolverConfig(res_tol=1e-10, max_iters=200),
        callback=lambda it, pt: states.append(pt),
    )
    return states, trace, time.perf_counter() - t0


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
