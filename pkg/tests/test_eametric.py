import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_model
from earcg.blocks import BlockArray
from earcg.eametric import (
    DenseShiftedOperator,
    FomConfig,
    ShiftSpec,
    apply_shifted,
    build_shift,
    ea_gradient,
    ea_inner,
    exact_projection_oracle,
    exact_sylvester_solve,
    exact_xphi_oracle,
    fom_solve,
    herm_basis,
    tangent_space_spectra,
    uniform_shift,
)
from earcg.errors import DimensionError, IllConditionedGramError, ParameterError, SpectralError
from earcg.solvers import aufbau_frame
from earcg.stiefel import random_frame, random_tangent, real_pairing, tangency_error

seeds = st.integers(0, 2**32 - 1)


def crandn(rng, shapes):
    return BlockArray(rng.standard_normal(s) + 1j * rng.standard_normal(s) for s in shapes)


@pytest.fixture(scope="module")
def setup():
    m = small_model(kpoints=[[0.0], [0.3]])
    rng = np.random.default_rng(7)
    phi = random_frame(rng, m.shapes(2))
    ham = m.hamiltonian(phi)
    res, lam, _ = m.residual(phi)
    hd = [ham.dense(k) for k in range(m.basis.nblocks)]
    return m, phi, ham, lam, hd


def test_build_shift_examples():
    s = build_shift([np.eye(2)], 0.01)
    np.testing.assert_allclose(s.sigma[0], 0.99 * np.eye(2))
    s = build_shift([np.zeros((2, 2))], 1.0)
    np.testing.assert_allclose(s.sigma[0], -np.eye(2))
    s = build_shift([np.diag([1.0, 3.0])], 0.5)
    np.testing.assert_allclose(s.sigma[0], np.diag([0.5, 2.5]))
    s = build_shift([np.array([[1.0, 2.0], [0.0, 1.0]])], 0.1)
    np.testing.assert_allclose(s.sigma[0], s.sigma[0].conj().T)
    for bad in (0.0, -1.0):
        with pytest.raises(ParameterError):
            build_shift([np.eye(2)], bad)
    with pytest.raises(ParameterError):
        ShiftSpec((np.eye(2),), 0.0)


def test_apply_shifted_zero_shift_is_hamiltonian(setup, rng):
    m, phi, ham, _, _ = setup
    v = crandn(rng, m.shapes(2))
    zero = ShiftSpec(tuple(np.zeros((2, 2)) for _ in phi), 1.0)
    assert (apply_shifted(ham, zero, v) - ham.apply(v)).norm() == 0.0


def test_apply_shifted_matches_kronecker_and_is_symmetric(setup, rng):
    m, phi, ham, lam, hd = setup
    shift = build_shift(lam, 0.01)
    a, b = crandn(rng, m.shapes(2)), crandn(rng, m.shapes(2))
    ha = apply_shifted(ham, shift, a)
    for h, s, ab, hab in zip(hd, shift.sigma, a, ha):
        op = DenseShiftedOperator(h, s)
        np.testing.assert_allclose(op.apply(ab), hab, atol=1e-10)
    lhs = real_pairing(ha, b)
    rhs = real_pairing(a, apply_shifted(ham, shift, b))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)
    assert ea_inner(ham, shift, a, b) == pytest.approx(lhs)
    with pytest.raises(DimensionError):
        apply_shifted(ham, shift, BlockArray([np.zeros((3, 2))]))


def test_apply_shifted_at_eigenstate_gives_mu_phi():
    m = small_model(kappa=0.0)  # linear: exact eigenstates are NLEVP solutions
    phi, _ = aufbau_frame(m.hamiltonian_for_density(np.zeros(m.basis.grid)), 2)
    ham = m.hamiltonian(phi)
    _, lam, _ = m.residual(phi)
    out = apply_shifted(ham, build_shift(lam, 0.01), phi)
    assert (out - 0.01 * phi).norm() <= 1e-10


def test_fom_scalar_case_matches_dense_inverse():
    m = small_model()
    rng = np.random.default_rng(3)
    phi = random_frame(rng, m.shapes(1))
    ham = m.hamiltonian(phi)
    h = ham.dense(0)
    sigma = -0.5
    shift = ShiftSpec((np.array([[sigma]], complex),), 1.0)
    rhs = crandn(rng, m.shapes(1))
    tol = 1e-3
    out = fom_solve(ham, shift, rhs, rhs.zeros_like(), FomConfig(rel_tol=tol, max_block_iters=40))
    exact = np.linalg.solve(h - sigma * np.eye(h.shape[0]), rhs[0])
    assert out.converged
    np.testing.assert_array_less(out.rel_residual, tol)
    # residual bound -> error bound through the condition number
    cond = np.linalg.cond(h - sigma * np.eye(h.shape[0]))
    assert np.linalg.norm(out.x[0] - exact) <= cond * tol * np.linalg.norm(exact)


def test_fom_zero_rhs_takes_zero_iterations(setup):
    m, phi, ham, lam, _ = setup
    z = phi.zeros_like()
    out = fom_solve(ham, build_shift(lam), z, z)
    assert out.iterations == 0 and out.converged and out.x.norm() == 0.0


@pytest.mark.parametrize("precond", [False, True])
def test_fom_tight_tolerance_matches_dense_solve(setup, precond):
    m, phi, ham, lam, hd = setup
    shift = build_shift(lam, 0.01)
    p = m.tpa_preconditioner(phi) if precond else None
    n = max(m.basis.sizes)
    out = fom_solve(ham, shift, phi, phi / 0.01, FomConfig(rel_tol=1e-10, max_block_iters=n), p)
    exact = exact_sylvester_solve(hd, shift, phi)
    assert out.converged
    assert (out.x - exact).norm() <= 1e-8 * exact.norm()


def test_fom_respects_reused_h_x0(setup):
    m, phi, ham, lam, _ = setup
    shift = build_shift(lam, 0.01)
    x0 = phi / 0.01
    a = fom_solve(ham, shift, phi, x0, FomConfig(rel_tol=1e-6, max_block_iters=30))
    b = fom_solve(ham, shift, phi, x0, FomConfig(rel_tol=1e-6, max_block_iters=30), h_x0=ham.apply(x0))
    assert (a.x - b.x).norm() <= 1e-10 * a.x.norm()


def test_fom_max_iterations_flags_stagnation(setup):
    m, phi, ham, lam, _ = setup
    out = fom_solve(ham, build_shift(lam, 0.01), phi, phi / 0.01, FomConfig(rel_tol=1e-12, max_block_iters=2))
    assert not out.converged and out.stagnated
    assert out.rel_residual == min(out.history)


def test_fom_default_tolerance_near_minimizer(gp1d_trajectory):
    states, _, _ = gp1d_trajectory
    pt = next(s for s in states if s.res_norm < 1e-3)
    shift = build_shift(pt.lam, 0.01)
    m = pt.ham.model
    out = fom_solve(pt.ham, shift, pt.phi, pt.phi / 0.01, FomConfig(), m.tpa_preconditioner(pt.phi), pt.hphi / 0.01)
    exact = exact_sylvester_solve([pt.ham.dense(0)], shift, pt.phi)
    assert out.rel_residual <= 2.5e-2
    # the gradient built from it points the same way as the exact-solve one
    g, g_ex = ea_gradient(pt.phi, out.x), ea_gradient(pt.phi, exact)
    assert (g - g_ex).norm() <= 0.1 * g_ex.norm()


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(1e-6, 1.0))
def test_ea_gradient_is_horizontal_for_any_x(seed, scale):
    rng = np.random.default_rng(seed)
    phi = random_frame(rng, [(20, 3), (18, 3)])
    x = phi / 0.01 + scale * crandn(rng, phi.shapes)
    g = ea_gradient(phi, x)
    for f, gb in zip(phi, g):
        assert np.linalg.norm(f.conj().T @ gb) <= 1e-12 * max(1.0, np.linalg.norm(gb))
    assert tangency_error(phi, g) <= 1e-12


def test_ea_gradient_span_invariance(rng):
    phi = random_frame(rng, [(15, 2)])
    mat = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) + 2 * np.eye(2)
    assert ea_gradient(phi, phi.rmatmul([mat])).norm() <= 1e-13


def test_ea_gradient_ill_conditioned_gram(rng):
    phi = random_frame(rng, [(15, 2)])
    x = BlockArray([np.column_stack([phi[0][:, 0], phi[0][:, 0]])])
    with pytest.raises(IllConditionedGramError):
        ea_gradient(phi, x)


def test_critical_point_gives_zero_gradient():
    m = small_model(kappa=0.0)
    phi, _ = aufbau_frame(m.hamiltonian_for_density(np.zeros(m.basis.grid)), 2)
    ham = m.hamiltonian(phi)
    _, lam, _ = m.residual(phi)
    hd = [ham.dense(0)]
    x = exact_sylvester_solve(hd, build_shift(lam, 0.01), phi)
    np.testing.assert_allclose(phi[0].conj().T @ x[0], np.eye(2) / 0.01, atol=1e-8)
    assert ea_gradient(phi, x).norm() <= 1e-10


def test_uniform_shift_closed_form_equals_oracle(setup):
    m, phi, ham, lam, hd = setup
    us = uniform_shift(6.0, 2, len(phi))
    xs, g_oracle = exact_xphi_oracle(phi, hd, us)
    g_closed = ea_gradient(phi, exact_sylvester_solve(hd, us, phi))
    assert (g_closed - g_oracle).norm() <= 1e-9 * phi.norm()
    # commuting case: X = <phi, H^{-1} phi>^{-1}
    z = exact_sylvester_solve(hd, us, phi)
    for x, f, zb in zip(xs, phi, z):
        np.testing.assert_allclose(x, np.linalg.inv(f.conj().T @ zb), atol=1e-9 * np.linalg.norm(x))


def test_xphi_oracle_scalar_and_defining_equation(setup, rng):
    m, _, _, _, _ = setup
    phi1 = random_frame(rng, m.shapes(1))
    ham = m.hamiltonian(phi1)
    hd = [ham.dense(k) for k in range(len(phi1))]
    _, lam, _ = m.residual(phi1)
    shift = build_shift(lam, 0.01)
    xs, _ = exact_xphi_oracle(phi1, hd, shift)
    z = exact_sylvester_solve(hd, shift, phi1)
    for x, f, zb in zip(xs, phi1, z):
        assert x[0, 0] == pytest.approx(1.0 / np.vdot(f, zb).real, rel=1e-10)

    phi, ham, hd = setup[1], setup[2], setup[4]
    shift = build_shift(setup[3], 0.01)
    xs, _ = exact_xphi_oracle(phi, hd, shift)
    z = exact_sylvester_solve(hd, shift, phi.rmatmul(xs))
    for f, zb in zip(phi, z):
        g = zb.conj().T @ f
        assert np.linalg.norm(g + g.conj().T - 2 * np.eye(2)) <= 1e-11 * 2


def test_projection_oracle_properties(setup, rng):
    m, phi, ham, lam, hd = setup
    shift = uniform_shift(6.0, 2, len(phi))  # coercive
    eta = random_tangent(rng, phi)
    assert (exact_projection_oracle(phi, hd, shift, eta) - eta).norm() <= 1e-10 * eta.norm()

    v = crandn(rng, phi.shapes)
    pv = exact_projection_oracle(phi, hd, shift, v)
    assert tangency_error(phi, pv) <= 1e-10 * pv.norm()
    hv = apply_shifted(ham, shift, v)
    for _ in range(20):
        xi = random_tangent(rng, phi)
        assert abs(ea_inner(ham, shift, pv, xi) - real_pairing(hv, xi)) <= 1e-9 * hv.norm() * xi.norm()

    # v = phi M with M Hermitian: projection agrees with the gradient formula
    mats = [np.eye(2, dtype=complex) for _ in phi]
    _, g = exact_xphi_oracle(phi, hd, shift)
    assert (exact_projection_oracle(phi, hd, shift, phi.rmatmul(mats)) - g).norm() <= 1e-10


def test_ea_inner_symmetric_and_bounded(setup, rng):
    m, phi, ham, lam, hd = setup
    sigma = 50.0
    us = uniform_shift(sigma, 2, len(phi))
    hnorm = max(np.linalg.norm(h, 2) for h in hd)
    hmin = min(np.linalg.eigvalsh(h)[0] for h in hd)
    for _ in range(5):
        a, b = random_tangent(rng, phi), random_tangent(rng, phi)
        assert ea_inner(ham, us, a, b) == pytest.approx(ea_inner(ham, us, b, a), rel=1e-10)
        aa = ea_inner(ham, us, a, a)
        assert aa >= (sigma + hmin) * a.norm() ** 2 * (1 - 1e-12)
        assert aa >= (sigma - hnorm) * a.norm() ** 2


def test_resonant_shift_raises_spectral_error():
    h = np.diag([1.0, 2.0, 3.0]).astype(complex)
    with pytest.raises(SpectralError):
        DenseShiftedOperator(h, np.array([[2.0]], complex))


def test_herm_basis_orthonormal():
    b = herm_basis(3)
    assert len(b) == 9
    gram = np.array([[np.vdot(x, y).real for y in b] for x in b])
    np.testing.assert_allclose(gram, np.eye(9), atol=1e-15)
    for x in b:
        np.testing.assert_allclose(x, x.conj().T)


def test_coercivity_spectra_at_minimizer(gp1d_trajectory):
    states, _, _ = gp1d_trajectory
    pt = states[-1]
    hd = [pt.ham.dense(0)]
    full, vert = tangent_space_spectra(pt.phi, hd, build_shift(pt.lam, 0.01))
    assert full[0][0] > 0
    # vertical block is mu * identity up to the residual
    np.testing.assert_allclose(vert[0], 0.01, atol=1e-8)
    eta = random_tangent(np.random.default_rng(0), pt.phi)
    assert ea_inner(pt.ham, build_shift(pt.lam, 0.01), eta, eta) > 0
    _, vert0 = tangent_space_spectra(pt.phi, hd, pt.lam)
    assert vert0[0][0] <= 1e-8
