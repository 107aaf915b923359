import numpy as np
import pytest
from scipy.linalg import expm

from opentqd.errors import ContractViolation
from opentqd.hs_algebra import SIGMA_X, SIGMA_Y, SIGMA_Z, Superop, pauli_basis
from opentqd.models import deutsch as dm
from opentqd.models import landau_zener as lz
from opentqd.models.harness import default_harness
from opentqd.spectral import JordanBlock, JordanStructure, SpectralPath, TimeGrid, spectral_path
from opentqd.tqd import (
    BlockCoefficients,
    PhaseProfile,
    adiabatic_phases,
    adiabatic_propagator_1d,
    adiabatic_propagator_1d_inverse,
    adiabatic_propagator_multiblock,
    adiabatic_transport,
    choi_min_eigenvalue,
    closed_generalized_tqd,
    fd_derivative,
    generalized_tqd_1d,
    generalized_tqd_multiblock,
    generalized_tqd_multiblock_path,
    inverse_engineer,
    is_time_independent,
    standard_cd,
    standard_cd_via_similarity,
    standard_tqd,
    theorem1_condition_check,
    theorem1_phases,
    time_independence_residual,
)


def static_path(M, n=10):
    return spectral_path(Superop.constant(M), TimeGrid(0, 1, n))


def adiabatic_thetas(path, j):
    G = np.diag(path.lefts[j] @ path.rights_dot[j])
    return path.eigenvalues[j] - G


# ---- closed-system helper ----------------------------------------------------


def test_fd_derivative_is_fourth_order():
    ts = np.linspace(0, 1, 101)
    err = np.max(np.abs(fd_derivative(np.sin(3 * ts), ts[1] - ts[0]) - 3 * np.cos(3 * ts)))
    assert err < 1e-6


def deutsch_states(p, t):
    alpha = np.pi - p.phi(t)
    e = np.exp(1j * alpha)
    return np.array([[1, 1], [e, -e]]) / np.sqrt(2)


def deutsch_states_dot(p, t):
    alpha_dot = -p.phi_dot
    e = np.exp(1j * (np.pi - p.phi(t)))
    return np.array([[0, 0], [1j * alpha_dot * e, -1j * alpha_dot * e]]) / np.sqrt(2)


def test_closed_tqd_deutsch_counterdiabatic_field(deutsch):
    t = 3.7
    U, Ud = deutsch_states(deutsch, t), deutsch_states_dot(deutsch, t)
    assert np.allclose(U @ np.diag([deutsch.omega, -deutsch.omega]) @ U.conj().T, dm.hamiltonian(deutsch, t))
    berry = np.einsum("in,in->n", U.conj(), Ud)
    thetas = np.array([deutsch.omega, -deutsch.omega]) - 1j * berry
    H = closed_generalized_tqd(lambda s: deutsch_states(deutsch, s), thetas, t)
    Hcd = H - dm.hamiltonian(deutsch, t)
    assert np.max(np.abs(Hcd - dm.cd_hamiltonian(deutsch))) < 1e-9
    assert np.allclose(Hcd, -(np.pi * deutsch.F / (4 * deutsch.tau)) * SIGMA_Z)
    H2 = closed_generalized_tqd(lambda s: deutsch_states(deutsch, s), thetas, t,
                                state_dot=lambda s: deutsch_states_dot(deutsch, s))
    assert np.max(np.abs(H2 - H)) < 1e-9


def test_closed_tqd_lz_counterdiabatic_field(lz_sec):
    def states(s):
        th = lz_sec.theta(s)
        return np.array([[np.cos(th / 2), -np.sin(th / 2)], [np.sin(th / 2), np.cos(th / 2)]])

    t = 4.0
    th = lz_sec.theta(t)
    E = 0.5 * lz_sec.omega0 / np.cos(th)
    assert np.allclose(states(t) @ np.diag([E, -E]) @ states(t).T, lz.hamiltonian(lz_sec, t))
    H = closed_generalized_tqd(states, [E, -E], t)
    assert np.max(np.abs(H - lz.hamiltonian(lz_sec, t) - 0.5 * lz_sec.theta_dot(t) * SIGMA_Y)) < 1e-9
    assert np.allclose(lz.cd_hamiltonian(lz_sec, t), 0.5 * lz_sec.theta_dot(t) * SIGMA_Y)


def test_closed_tqd_static_returns_hamiltonian():
    H0 = 0.4 * SIGMA_X + 0.9 * SIGMA_Z
    w, U = np.linalg.eigh(H0)
    assert np.allclose(closed_generalized_tqd(lambda s: U, w, 0.0), H0)


def test_closed_tqd_rejects_non_unitary():
    with pytest.raises(ContractViolation):
        closed_generalized_tqd(lambda s: np.array([[1, 1], [0, 1]]), [0, 0], 0.0)


# ---- adiabatic propagators ---------------------------------------------------


def test_propagator_identity_at_start(deutsch):
    path = dm.deutsch_analytic_spectrum(deutsch, TimeGrid(0, deutsch.tau, 50))
    assert np.allclose(adiabatic_propagator_1d(path, 0), np.eye(4), atol=1e-14)


def test_deutsch_propagator_gives_adiabatic_vector(deutsch):
    grid = TimeGrid(0, deutsch.tau, 100)
    path = dm.deutsch_analytic_spectrum(deutsch, grid)
    for j in (0, 37, 100):
        v = adiabatic_propagator_1d(path, j) @ dm.rho0_vector()
        assert np.max(np.abs(v - dm.adiabatic_vector(deutsch, grid.points[j]))) < 1e-12


def test_lz_propagator_gives_adiabatic_vector(lz_sec):
    grid = TimeGrid(0, lz_sec.tau, 4000)
    path = lz.lz_analytic_spectrum(lz_sec, grid)
    for j in (0, 1234, 4000):
        v = adiabatic_propagator_1d(path, j) @ lz.rho0_vector()
        assert np.max(np.abs(v - lz.adiabatic_vector(lz_sec, grid.points[j]))) < 1e-6


def test_propagator_inverse(lz_sec):
    grid = TimeGrid(0, lz_sec.tau, 200)
    path = lz.lz_analytic_spectrum(lz_sec, grid)
    for j in (50, 200):
        assert np.allclose(adiabatic_propagator_1d_inverse(path, j) @ adiabatic_propagator_1d(path, j), np.eye(4))


def test_phase_integral_converges(lz_sec):
    # trapezoid error is O(h^2); 8000 steps over tau = 10 is inside the gate
    coarse = lz.lz_analytic_spectrum(lz_sec, TimeGrid(0, lz_sec.tau, 8000))
    fine = lz.lz_analytic_spectrum(lz_sec, TimeGrid(0, lz_sec.tau, 16000))
    assert np.max(np.abs(adiabatic_phases(coarse)[-1] - adiabatic_phases(fine)[-1])) < 1e-7


def test_multiblock_reduces_to_one_dimensional(deutsch):
    grid = TimeGrid(0, deutsch.tau, 200)
    js = JordanStructure.from_frame_fn(lambda t: dm.frame(deutsch, t), 4)
    path = dm.deutsch_analytic_spectrum(deutsch, grid)
    tr = adiabatic_transport(js, grid)
    for j in (0, 99, 200):
        assert np.max(np.abs(tr.propagator(j) - adiabatic_propagator_1d(path, j))) < 1e-9
    assert np.allclose(adiabatic_propagator_multiblock(js, grid, 0), np.eye(4))


def constant_jordan_structure(S, lam=-0.3):
    return JordanStructure([
        JordanBlock(lambda t: lam, 2, lambda t: S[:, 0:2]),
        JordanBlock(lambda t: -1.0, 1, lambda t: S[:, 2:3]),
        JordanBlock(lambda t: -2.0, 1, lambda t: S[:, 3:4]),
    ])


def test_multiblock_static_two_block_coefficients():
    rng = np.random.default_rng(5)
    S = np.eye(4) + 0.2 * rng.standard_normal((4, 4))
    js = constant_jordan_structure(S)
    grid = TimeGrid(0, 2, 40)
    tr = adiabatic_transport(js, grid)
    for j, t in enumerate(grid.points):
        assert np.allclose(tr.v[0][j], [[1, t], [0, 1]], atol=1e-12)
    # the propagator is then the exact exponential of the static generator
    L = js.superop()(0.0)
    assert np.allclose(tr.propagator(len(grid) - 1), expm(2 * L), atol=1e-9)


def test_v_ode_residual_on_harness():
    js = default_harness().structure()
    tr = adiabatic_transport(js, TimeGrid(0, 1, 400))
    assert tr.ode_residual() < 1e-7


# ---- counter-diabatic generators ------------------------------------------------


def test_standard_cd_deutsch_constant(deutsch):
    path = dm.deutsch_analytic_spectrum(deutsch, TimeGrid(0, deutsch.tau, 20))
    for j in range(len(path.grid)):
        assert np.max(np.abs(standard_cd(path, j) - dm.cd_matrix(deutsch))) < 1e-12
    k = np.pi * deutsch.F / (2 * deutsch.tau)
    assert dm.cd_matrix(deutsch)[1, 2] == pytest.approx(k)
    assert dm.cd_matrix(deutsch)[2, 1] == pytest.approx(-k)


def test_standard_cd_static_is_zero():
    path = static_path(np.diag([0.0, -1.0, -2.0, -3.0]))
    assert np.max(np.abs(standard_cd(path, 3))) < 1e-12
    assert np.max(np.abs(standard_cd_via_similarity(path, 3))) < 1e-12


def test_standard_cd_lz_parallel(lz_sec):
    grid = TimeGrid(0, lz_sec.tau, 20)
    path = lz.lz_analytic_spectrum(lz_sec, grid)
    for j, t in enumerate(grid.points):
        cd = standard_cd(path, j)
        assert np.max(np.abs(cd - lz.cd_matrix_parallel(lz_sec, t))) < 1e-12
        assert np.max(np.abs(cd + cd.T)) < 1e-12


def test_standard_cd_lz_general_rate(lz_const):
    grid = TimeGrid(0, lz_const.tau, 20)
    path = lz.lz_analytic_spectrum(lz_const, grid)
    for j, t in enumerate(grid.points):
        assert np.max(np.abs(standard_cd(path, j) - lz.cd_matrix_general(lz_const, t))) < 1e-12


def test_listed_lz_matrix_differs_from_eigenvector_route(lz_const):
    t = 5.0
    fr = lz.frame(lz_const, t)
    listed = lz.cd_matrix_listed(lz_const, t)
    assert np.max(np.abs(listed - standard_cd(fr, None))) > 1e-3
    # both agree whenever the rate follows the angle
    p = lz.LZParams(gamma_mode="sec_theta")
    assert np.max(np.abs(lz.cd_matrix_listed(p, t) - lz.cd_matrix_general(p, t))) < 1e-15


@pytest.mark.parametrize("route", ["closed_form", "direct"])
def test_similarity_route_matches(route, deutsch, lz_const):
    for path in (dm.deutsch_analytic_spectrum(deutsch, TimeGrid(0, 10, 10)),
                 lz.lz_analytic_spectrum(lz_const, TimeGrid(0, 10, 10))):
        for j in range(len(path.grid)):
            assert np.max(np.abs(standard_cd(path, j) - standard_cd_via_similarity(path, j, route=route))) < 1e-9
    js = default_harness().structure()
    for t in (0.0, 0.5, 1.0):
        assert np.max(np.abs(standard_cd(js, t) - standard_cd_via_similarity(js, t, route=route))) < 1e-9


def test_similarity_bad_route(deutsch):
    with pytest.raises(ValueError):
        standard_cd_via_similarity(dm.frame(deutsch, 0.0), None, route="other")


def test_standard_tqd_is_sum(deutsch):
    path = dm.deutsch_analytic_spectrum(deutsch, TimeGrid(0, 10, 10))
    L = dm.deutsch_lindbladian(deutsch)
    assert np.allclose(standard_tqd(L, path, 4), L(4.0) + dm.cd_matrix(deutsch))


# ---- generalized generators ---------------------------------------------------------


@pytest.mark.parametrize("model", ["deutsch", "lz_sec", "lz_const"])
def test_adiabatic_phases_recover_standard(model, request):
    p = request.getfixturevalue(model)
    grid = TimeGrid(0, p.tau, 20)
    if model == "deutsch":
        path, L = dm.deutsch_analytic_spectrum(p, grid), dm.deutsch_lindbladian(p)
    else:
        path, L = lz.lz_analytic_spectrum(p, grid), lz.lz_lindbladian(p)
    for j, t in enumerate(grid.points):
        a = generalized_tqd_1d(path, adiabatic_thetas(path, j), j)
        assert np.max(np.abs(a - L(t) - standard_cd(path, j))) < 1e-9


def test_deutsch_constant_generator(deutsch):
    th2 = -2 * deutsch.gamma0
    th3 = dm.phase3_antisymmetric(deutsch, th2)
    assert th3 == pytest.approx(-2 * deutsch.gamma0)
    thetas = PhaseProfile.constant([0, -2 * deutsch.gamma0, th2, th3])
    grid = TimeGrid(0, deutsch.tau, 50)
    for t in grid.points:
        M = generalized_tqd_1d(dm.frame(deutsch, t), thetas, t)
        assert np.max(np.abs(M - dm.time_independent_matrix(deutsch))) < 1e-9
        assert np.max(np.abs(M[0])) < 1e-12
    k = np.pi * deutsch.F / (2 * deutsch.tau)
    g = -2 * deutsch.gamma0
    assert np.allclose(dm.time_independent_matrix(deutsch)[1:, 1:], [[g, k, 0], [-k, g, 0], [0, 0, g]])


def test_zero_phases_static_path_gives_zero():
    path = static_path(np.diag([0.0, -1.0, -2.0, -3.0]))
    assert np.max(np.abs(generalized_tqd_1d(path, np.zeros(4), 2))) < 1e-12


@pytest.mark.parametrize("th2", [-0.2, -0.5 + 0.3j, 0.1])
def test_antisymmetric_phase_choice(deutsch, th2):
    th3 = dm.phase3_antisymmetric(deutsch, th2)
    for t in (0.0, 2.0, 7.5):
        M = generalized_tqd_1d(dm.frame(deutsch, t), [0, -2 * deutsch.gamma0, th2, th3], t)
        assert np.max(np.abs(M - dm.generalized_matrix_antisym(deutsch, t, th2))) < 1e-9
        off = M[1:, 1:] - np.diag(np.diag(M[1:, 1:]))
        assert np.max(np.abs(off + off.T)) < 1e-9


@pytest.mark.parametrize("th2,th3", [(-0.3, -0.7), (-0.2 + 0.1j, -0.5), (-0.4, -0.4)])
def test_free_phase_matrix_corrected(deutsch, th2, th3):
    for t in (0.3, 4.0, 9.0):
        M = generalized_tqd_1d(dm.frame(deutsch, t), [0, -2 * deutsch.gamma0, th2, th3], t)
        assert np.max(np.abs(M - dm.generalized_matrix_free(deutsch, t, th2, th3, verbatim=False))) < 1e-9


def test_free_phase_matrix_listed_form_limits():
    p = dm.DeutschParams(tau=1.0)
    th = -0.35
    for t in (0.2, 0.6):
        M = generalized_tqd_1d(dm.frame(p, t), [0, -2 * p.gamma0, th, th], t)
        assert np.max(np.abs(M - dm.generalized_matrix_free(p, t, th, th, verbatim=True))) < 1e-9
    q = dm.DeutschParams(tau=10.0)
    t = 3.0
    M = generalized_tqd_1d(dm.frame(q, t), [0, -2 * q.gamma0, -0.3, -0.7], t)
    assert np.max(np.abs(M - dm.generalized_matrix_free(q, t, -0.3, -0.7, verbatim=True))) > 1e-3


def test_lz_generalized_matrix(lz_sec):
    for t in (0.0, 3.0, 9.5):
        fr = lz.frame(lz_sec, t)
        dec = -2 * lz_sec.gamma(t)
        M = generalized_tqd_1d(fr, [0, dec, dec, dec], t)
        assert np.max(np.abs(M - lz.generalized_matrix(lz_sec, t))) < 1e-9
        thd = lz_sec.theta_dot(t)
        sub = lz.generalized_matrix(lz_sec, t)[np.ix_([1, 3], [1, 3])]
        assert np.allclose(sub, [[dec, thd], [-thd, dec]])


def test_multiblock_adiabatic_q_recovers_standard():
    h = default_harness()
    js, L = h.structure(), h.superop()
    grid = TimeGrid(0, 1, 400)
    q = adiabatic_transport(js, grid).coefficients()
    gen = generalized_tqd_multiblock_path(js, q)
    for j in range(0, len(grid), 25):
        t = grid.points[j]
        assert np.max(np.abs(gen[j] - L(t) - standard_cd(js, t))) < 1e-8


def test_multiblock_one_dimensional_consistency(deutsch):
    grid = TimeGrid(0, deutsch.tau, 2000)
    path = dm.deutsch_analytic_spectrum(deutsch, grid)
    thetas = np.array([0, -0.2, -0.3 + 0.05j, -0.6])
    integ = np.outer(grid.points, thetas)
    q = BlockCoefficients.from_phases(grid, integ)
    for j in (0, 750, 2000):
        a = generalized_tqd_multiblock(path, q, j)
        assert np.max(np.abs(a - generalized_tqd_1d(path, thetas, j))) < 1e-9


def test_multiblock_identity_q_keeps_derivative_term():
    js = default_harness().structure()
    grid = TimeGrid(0, 1, 20)
    q = BlockCoefficients.from_q(grid, [np.broadcast_to(np.eye(n), (len(grid), n, n)) for n in js.sizes])
    fr = js.frame(grid.points[7])
    assert np.max(np.abs(generalized_tqd_multiblock(js, q, 7) - fr.rights_dot @ fr.lefts)) < 1e-12


def test_multiblock_contract_checked():
    js = default_harness().structure()
    grid = TimeGrid(0, 1, 20)
    q = [np.broadcast_to(np.eye(n), (len(grid), n, n)) for n in js.sizes]
    bad = BlockCoefficients(grid, q, [2 * a for a in q])
    with pytest.raises(ContractViolation):
        generalized_tqd_multiblock(js, bad, 3)


# ---- inverse engineering --------------------------------------------------------


def test_inverse_engineer_deutsch(deutsch):
    grid = TimeGrid(0, deutsch.tau, 2000)
    path = dm.deutsch_analytic_spectrum(deutsch, grid)
    V = np.array([adiabatic_propagator_1d(path, j) for j in range(len(grid))])
    Vi = np.array([adiabatic_propagator_1d_inverse(path, j) for j in range(len(grid))])
    Lie = inverse_engineer(V, grid, V_inv=Vi)
    for t in grid.points[::200]:
        expected = dm.lindbladian_matrix(deutsch, t) + dm.cd_matrix(deutsch)
        assert np.max(np.abs(Lie(t) - expected)) < 1e-6
    Lnum = inverse_engineer(V, grid)
    assert np.max(np.abs(Lnum(5.0) - Lie(5.0))) < 1e-9


def test_inverse_engineer_identity_and_exponential():
    grid = TimeGrid(0, 1, 400)
    Z = inverse_engineer(Superop.constant(np.eye(3)), grid)
    assert np.max(np.abs(Z(0.5))) == 0
    rng = np.random.default_rng(2)
    M = 0.5 * rng.standard_normal((3, 3))
    Lm = inverse_engineer(Superop(3, lambda t: expm(M * t)), grid)
    for t in (0.0, 0.37, 1.0):
        assert np.max(np.abs(Lm(t) - M)) < 1e-8


def test_inverse_engineer_refuses_singular():
    grid = TimeGrid(0, 1, 10)
    with pytest.raises(ContractViolation):
        inverse_engineer(Superop.constant(np.diag([1.0, 0.0])), grid)


# ---- time independence ------------------------------------------------------------


def test_theorem1_phases(deutsch, lz_sec):
    path = dm.deutsch_analytic_spectrum(deutsch, TimeGrid(0, 10, 30))
    assert np.max(np.abs(theorem1_phases(path)(3.3))) < 1e-12
    sp = static_path(np.diag([0.0, -1.0, -2.0, -3.0]))
    assert np.max(np.abs(theorem1_phases(sp)(0.5))) < 1e-12
    lp = lz.lz_analytic_spectrum(lz_sec, TimeGrid(0, 10, 30))
    vals = theorem1_phases(lp)(4.4)
    assert abs(vals[2]) < 1e-10 and abs(vals[3]) < 1e-10


def test_condition_report(deutsch, lz_const):
    rep = theorem1_condition_check(dm.deutsch_analytic_spectrum(deutsch, TimeGrid(0, 10, 200)))
    assert rep.constancy_holds and rep.transport_holds
    assert rep.condition == "constant-overlaps"
    rep = theorem1_condition_check(static_path(np.diag([0.0, -1.0, -2.0, -3.0])))
    assert rep.constancy_holds and rep.transport_holds
    rep = theorem1_condition_check(lz.lz_analytic_spectrum(lz_const, TimeGrid(0, 10, 200)))
    assert not rep.constancy_holds
    assert rep.condition == "none"


def test_lz_overlap_against_finite_difference(lz_const):
    t, h = 5.0, 1e-3
    E = lz.left_vectors(lz_const, t)
    dD = (lz.right_vectors(lz_const, t + h) - lz.right_vectors(lz_const, t - h)) / (2 * h)
    fd = E @ dD
    g2, g3 = lz.berry_overlaps(lz_const, t)
    assert abs(fd[2, 2] - g2) < 1e-6 and abs(fd[3, 3] - g3) < 1e-6
    assert lz_const.varpi(t) == pytest.approx(lz_const.gamma0 * lz_const.theta0 / lz_const.tau * np.tan(lz_const.theta(t)))


def test_time_independence_residuals(deutsch):
    grid = TimeGrid(0, deutsch.tau, 200)
    Lti = Superop(4, lambda t: generalized_tqd_1d(dm.frame(deutsch, t), [0, -0.2, -0.2, -0.2], t))
    assert time_independence_residual(Lti, grid) < 1e-10
    assert is_time_independent(Lti, grid)
    Lstd = Superop(4, lambda t: dm.lindbladian_matrix(deutsch, t) + dm.cd_matrix(deutsch))
    assert time_independence_residual(Lstd, grid) > 0.1
    assert not is_time_independent(Lstd, grid)
    assert time_independence_residual(Superop.constant(np.ones((4, 4))), grid) == 0


def test_choi_diagnostic(deutsch, lz_sec):
    B = pauli_basis()
    assert choi_min_eigenvalue(dm.lindbladian_matrix(deutsch, 1.0), B, 0.01) > -1e-12
    assert choi_min_eigenvalue(dm.time_independent_matrix(deutsch), B, 0.01) > -1e-12
    # damping only the y component is positive but not completely positive
    assert choi_min_eigenvalue(np.diag([0.0, 0.0, -1.0, 0.0]), B, 0.1) < -1e-3
