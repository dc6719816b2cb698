"""Acceptance criteria 1-8.

Each test prints (and records for the terminal summary) one line
``PASS criterion N: ...`` or ``FAIL criterion N: ...`` before asserting.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from conftest import ACCEPTANCE_LINES
from earcg.eametric import (
    apply_shifted,
    build_shift,
    ea_gradient,
    ea_inner,
    exact_projection_oracle,
    exact_sylvester_solve,
    exact_xphi_oracle,
    tangent_space_spectra,
    uniform_shift,
)
from earcg.harness.cli import main as cli_main
from earcg.harness.config import load_config
from earcg.harness.experiment import run_experiment
from earcg.harness.output import strip_wall_time
from earcg.matcore import solve_lyapunov, solve_small_sylvester
from earcg.solvers import LineSearchParams, SolverConfig, run_earcg
from earcg.solvers.linesearch import energy_ok
from earcg.stiefel import (
    orthonormality_error,
    polar_factor,
    polar_retract,
    polar_transport,
    random_frame,
    random_tangent,
    real_pairing,
    tangency_error,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def report(n: int, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _unit_tangent(rng, phi):
    eta = random_tangent(rng, phi)
    return eta / eta.norm()


# ---------------------------------------------------------------------------


def test_criterion_1_geometry():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = {"orth": 0.0, "r0": 0.0, "tangency": 0.0, "fd": 0.0}
    min_exponent = np.inf
    hs = np.array([1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    fd_h = 1e-5
    for _ in range(100):
        n = int(rng.integers(4, 65))
        p = int(rng.integers(1, min(4, n - 1) + 1))
        phi = random_frame(rng, [(n, p)])
        eta = _unit_tangent(rng, phi)
        tau = float(rng.uniform(0.1, 1.0))

        worst["orth"] = max(worst["orth"], orthonormality_error(polar_retract(phi, tau * eta)))
        worst["r0"] = max(worst["r0"], (polar_retract(phi, 0 * eta) - phi).norm())

        errs = [(polar_retract(phi, h * eta) - phi - h * eta).norm() for h in hs]
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        min_exponent = min(min_exponent, slope)

        t_eta = polar_transport(phi, tau, eta)
        worst["tangency"] = max(worst["tangency"], tangency_error(polar_retract(phi, tau * eta), t_eta))
        fd = (polar_factor(phi + (tau + fd_h) * eta) - polar_factor(phi + (tau - fd_h) * eta)) / (2 * fd_h)
        worst["fd"] = max(worst["fd"], (fd - t_eta).norm() / t_eta.norm())
    dt = time.perf_counter() - t0
    ok = (
        worst["orth"] <= 1e-12 and worst["r0"] <= 1e-12 and min_exponent >= 1.9
        and worst["tangency"] <= 1e-10 and worst["fd"] <= 1e-6 and dt < 10
    )
    report(
        1, ok,
        f"orth {worst['orth']:.1e}, R(0) {worst['r0']:.1e}, min exponent {min_exponent:.3f}, "
        f"tangency {worst['tangency']:.1e}, transport-vs-FD {worst['fd']:.1e}, {dt:.1f}s",
    )


def test_criterion_2_small_matrix_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)

    def crandn(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    def herm(m):
        return 0.5 * (m + m.conj().T)

    worst_lyap = worst_syl = 0.0
    for _ in range(200):
        p = int(rng.integers(1, 7))
        q = int(rng.integers(1, 13))
        g = crandn(p, p)
        s = g @ g.conj().T + 0.1 * np.eye(p)
        b = herm(crandn(p, p))
        x = solve_lyapunov(s, b)
        kron = np.kron(np.eye(p), s) + np.kron(s.T, np.eye(p))
        x_ref = np.linalg.solve(kron, b.reshape(-1, order="F")).reshape(p, p, order="F")
        worst_lyap = max(worst_lyap, np.linalg.norm(x - x_ref) / np.linalg.norm(x_ref))

        a = herm(crandn(q, q))
        sig = herm(crandn(p, p))
        c = crandn(q, p)
        y = solve_small_sylvester(a, sig, c)
        kron = np.kron(np.eye(p), a) - np.kron(sig.T, np.eye(q))
        y_ref = np.linalg.solve(kron, c.reshape(-1, order="F")).reshape(q, p, order="F")
        worst_syl = max(worst_syl, np.linalg.norm(y - y_ref) / np.linalg.norm(y_ref))
    dt = time.perf_counter() - t0
    ok = worst_lyap <= 1e-10 and worst_syl <= 1e-10 and dt < 5
    report(2, ok, f"Lyapunov rel {worst_lyap:.1e}, Sylvester rel {worst_syl:.1e}, {dt:.1f}s")


def _early_states(states, count=5, floor=1e-2):
    """First iterates whose residual is large enough for round-off-free finite differences."""
    return [pt for pt in states if pt.res_norm >= floor][:count]


def test_criterion_3_gradient_representation(gp1d, gp1d_trajectory):
    model, p, _ = gp1d
    states, _, t_traj = gp1d_trajectory
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    chosen = _early_states(states)
    h = 1e-5
    worst_fd = worst_uniform = worst_corrected = 0.0
    for pt in chosen:
        hd = [pt.ham.dense(k) for k in range(len(pt.phi))]
        eta = _unit_tangent(rng, pt.phi)
        target = real_pairing(pt.res, eta)

        fd = (model.energy(polar_retract(pt.phi, h * eta)) - model.energy(polar_retract(pt.phi, -h * eta))) / (2 * h)
        worst_fd = max(worst_fd, _rel(fd, target))

        # uniform shift: the closed-form gradient is exact
        us = uniform_shift(5.0, p, len(pt.phi))
        g_u = ea_gradient(pt.phi, exact_sylvester_solve(hd, us, pt.phi))
        worst_uniform = max(worst_uniform, _rel(ea_inner(pt.ham, us, g_u, eta), target))

        # corrected shift: exact gradient from the Hermitian constraint
        cs = build_shift(pt.lam, 0.01)
        _, g_c = exact_xphi_oracle(pt.phi, hd, cs)
        worst_corrected = max(worst_corrected, _rel(ea_inner(pt.ham, cs, g_c, eta), target))
    dt = time.perf_counter() - t0 + t_traj
    ok = len(chosen) == 5 and worst_fd <= 1e-5 and max(worst_uniform, worst_corrected) <= 1e-8 and dt < 30
    report(
        3, ok,
        f"{len(chosen)} states (res {chosen[0].res_norm:.1e}..{chosen[-1].res_norm:.1e}), "
        f"FD rel {worst_fd:.1e}, exact-solve rel {worst_uniform:.1e} (uniform) / "
        f"{worst_corrected:.1e} (corrected), {dt:.1f}s",
    )


def _xphi_deviation(pt, mu=0.01):
    hd = [pt.ham.dense(k) for k in range(len(pt.phi))]
    x = exact_sylvester_solve(hd, build_shift(pt.lam, mu), pt.phi)
    return float(np.sqrt(sum(
        np.linalg.norm(f.conj().T @ xb - np.eye(f.shape[1]) / mu) ** 2 for f, xb in zip(pt.phi, x)
    )))


def test_criterion_4_projection_and_gradient_oracles(gp1d, gp1d_trajectory):
    model, p, _ = gp1d
    states, _, t_traj = gp1d_trajectory
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    n = states[0].phi[0].shape[0]

    # projection: g(P v, eta) = <H_Sigma v, eta> for tangent eta
    pt = next(s for s in states if s.res_norm <= 1e-4)
    hd = [pt.ham.dense(k) for k in range(len(pt.phi))]
    cs = build_shift(pt.lam, 0.01)
    v = random_tangent(rng, pt.phi) + pt.phi.rmatmul([rng.standard_normal((p, p))])
    pv = exact_projection_oracle(pt.phi, hd, cs, v)
    hv = apply_shifted(pt.ham, cs, v)
    worst_proj = 0.0
    for _ in range(20):
        eta = _unit_tangent(rng, pt.phi)
        worst_proj = max(worst_proj, abs(ea_inner(pt.ham, cs, pv, eta) - real_pairing(hv, eta))
                         / (hv.norm() * eta.norm()))
    worst_proj = max(worst_proj, tangency_error(pt.phi, pv) / pv.norm())

    # uniform shift: closed form equals the Hermitian-constraint gradient; G is a
    # difference of O(||phi||) terms, so the error is measured on that scale
    worst_uniform = 0.0
    for s in states[::3]:
        hds = [s.ham.dense(k) for k in range(len(s.phi))]
        us = uniform_shift(5.0, p, len(s.phi))
        g_closed = ea_gradient(s.phi, exact_sylvester_solve(hds, us, s.phi))
        _, g_oracle = exact_xphi_oracle(s.phi, hds, us)
        worst_uniform = max(worst_uniform, (g_closed - g_oracle).norm() / s.phi.norm())

    # corrected shift: the gap scales like ||res||^2 (states above the round-off floor)
    near = [s for s in states if 1e-6 <= s.res_norm <= 1e-4]
    worst_scaled = 0.0
    for s in near:
        hds = [s.ham.dense(k) for k in range(len(s.phi))]
        cs_s = build_shift(s.lam, 0.01)
        g_closed = ea_gradient(s.phi, exact_sylvester_solve(hds, cs_s, s.phi))
        _, g_oracle = exact_xphi_oracle(s.phi, hds, cs_s)
        worst_scaled = max(worst_scaled, (g_closed - g_oracle).norm() / s.res_norm**2)

    # quadratic shrink: pair of iterates about a decade apart, normalized to exactly 10x
    cand = [s for s in states if 5e-6 <= s.res_norm <= 1e-3]
    devs = [_xphi_deviation(s) for s in cand]
    pairs = [(i, j) for i in range(len(cand)) for j in range(i + 1, len(cand))
             if 5 <= cand[i].res_norm / cand[j].res_norm <= 20]
    i, j = min(pairs, key=lambda ij: abs(np.log(cand[ij[0]].res_norm / cand[ij[1]].res_norm / 10)))
    drop = cand[i].res_norm / cand[j].res_norm
    shrink = devs[i] / devs[j] * (10.0 / drop) ** 2

    dt = time.perf_counter() - t0 + t_traj
    ok = (
        n <= 128 and worst_proj <= 1e-9 and worst_uniform <= 1e-9 and len(near) >= 2
        and worst_scaled <= 10 and 30 <= shrink <= 300 and dt < 30
    )
    report(
        4, ok,
        f"projection {worst_proj:.1e}, uniform closed form {worst_uniform:.1e}, "
        f"corrected gap/res^2 <= {worst_scaled:.2f} on {len(near)} states, "
        f"shrink {shrink:.0f} for a {drop:.1f}x drop (normalized to 10x), {dt:.1f}s",
    )


def test_criterion_5_coercivity(gp1d, gp1d_trajectory):
    states, trace, t_traj = gp1d_trajectory
    t0 = time.perf_counter()
    pt = states[-1]
    hd = [pt.ham.dense(k) for k in range(len(pt.phi))]
    full, _ = tangent_space_spectra(pt.phi, hd, build_shift(pt.lam, 0.01))
    _, vert0 = tangent_space_spectra(pt.phi, hd, pt.lam)
    min_full = min(f[0] for f in full)
    min_vert0 = min(v[0] for v in vert0)
    dt = time.perf_counter() - t0 + t_traj
    ok = pt.res_norm <= 1e-9 and min_full > 0 and min_vert0 <= 1e-8 and dt < 60
    report(
        5, ok,
        f"res {pt.res_norm:.1e}, min eig (mu=0.01, tangent) {min_full:.3e}, "
        f"min eig (mu=0, vertical) {min_vert0:.1e}, {dt:.1f}s",
    )


def test_criterion_6_end_to_end(gp1d):
    model, p, phi0 = gp1d
    t0 = time.perf_counter()
    cfg = SolverConfig(res_tol=1e-8, max_iters=200, mu=0.01, linesearch=LineSearchParams())
    assert cfg.fom.rel_tol == 2.5e-2
    ls = cfg.linesearch
    assert (ls.delta, ls.sigma_ls, ls.gamma, ls.epsilon) == (0.05, 0.1, 0.5, 1e-12)
    phi, trace = run_earcg(model, phi0, cfg)
    bad = []
    for rec in trace.records[1:]:
        e_ok = energy_ok(rec.energy, rec.energy_prev, ls.epsilon)
        c_ok = abs(rec.slope_new) <= ls.curvature_factor * abs(rec.slope0)
        if not (e_ok and c_ok and rec.wolfe_ok):
            bad.append(rec.iter)
    ham = model.hamiltonian(phi)
    _, lam, _ = model.residual(phi)
    aufbau = 0.0
    for k, lk in enumerate(lam):
        ref = np.linalg.eigvalsh(ham.dense(k))[:p]
        aufbau = max(aufbau, np.abs(np.linalg.eigvalsh(lk) - ref).max())
    dt = time.perf_counter() - t0
    ok = trace.status == "converged" and trace.iterations <= 200 and not bad and aufbau <= 1e-7 and dt < 120
    report(
        6, ok,
        f"{trace.status} in {trace.iterations} iterations (res {trace.final.res_fro:.1e}), "
        f"Wolfe violations {bad}, Aufbau {aufbau:.1e}, {dt:.1f}s",
    )


def test_criterion_7_stiff_trends(tmp_path):
    t0 = time.perf_counter()
    cfg = load_config(CONFIGS / "stiff-1d.toml")
    res = run_experiment(cfg, tmp_path / "stiff")
    tr = res.traces
    c_ea, c_gd, c_l2 = (tr[n].first_crossing(1e-6) for n in ("earcg", "eargd", "l2rcg"))
    crossed = all(c is not None for c in (c_ea, c_gd, c_l2))
    ratio = c_l2.ham_applies / c_ea.ham_applies if crossed else float("nan")
    energies = {n: t.final.energy for n, t in tr.items() if t is not None}
    spread = max(energies.values()) - min(energies.values()) if len(energies) == 4 else float("inf")
    dt = time.perf_counter() - t0
    ok = crossed and ratio >= 3 and c_ea.iter <= c_gd.iter and spread <= 1e-7 and dt < 300
    report(
        7, ok,
        (f"H-apps at 1e-6 earcg {c_ea.ham_applies} vs l2rcg {c_l2.ham_applies} (ratio {ratio:.1f}), "
         f"iters earcg {c_ea.iter} vs eargd {c_gd.iter}, " if crossed else "a solver never reached 1e-6, ")
        + f"energy spread {spread:.1e} over {sorted(energies)}, {dt:.1f}s",
    )


def test_criterion_8_determinism(tmp_path):
    cfg_path = CONFIGS / "gp-1d.toml"
    outs = [tmp_path / "a", tmp_path / "b"]
    codes = [cli_main(["run", str(cfg_path), "--out", str(o), "--quiet"]) for o in outs]
    csvs = sorted(p.name for p in outs[0].glob("*.csv"))
    same = [
        strip_wall_time((outs[0] / name).read_text()) == strip_wall_time((outs[1] / name).read_text())
        for name in csvs
    ]
    ok = codes == [0, 0] and len(csvs) == 4 and all(same)
    report(8, ok, f"exit codes {codes}, {sum(same)}/{len(csvs)} CSVs identical without wall time")
