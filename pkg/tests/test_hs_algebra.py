import numpy as np
import pytest

from opentqd.errors import DimensionMismatch, InvalidStateError
from opentqd.hs_algebra import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    LindbladSpec,
    OperatorBasis,
    Superop,
    build_superop,
    check_density_matrix,
    devectorize,
    gell_mann_basis,
    hamiltonian_superop,
    hs_inner,
    pauli_basis,
    vectorize,
)
from opentqd.models import deutsch as dm
from opentqd.models import landau_zener as lz

from conftest import random_density

B = pauli_basis()


def test_pauli_basis_elements():
    assert np.allclose(B.elements[0], np.eye(2))
    assert np.allclose(B.elements[3], np.diag([1, -1]))
    assert np.trace(SIGMA_X @ SIGMA_X.conj().T) == pytest.approx(2)
    assert abs(np.trace(SIGMA_X @ SIGMA_Y.conj().T)) < 1e-15


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_gell_mann_orthogonality(dim):
    b = gell_mann_basis(dim)
    els = b.elements
    assert np.allclose(els[0], np.eye(dim))
    assert np.max(np.abs(np.einsum("nii->n", els[1:]))) < 1e-12
    gram = np.einsum("nij,mij->nm", els, els.conj())
    assert np.max(np.abs(gram - dim * np.eye(dim * dim))) < 1e-12
    assert b.is_hermitian


def test_gell_mann_two_is_pauli():
    assert np.allclose(gell_mann_basis(2).elements, B.elements)


def test_basis_validation():
    with pytest.raises(ValueError):
        OperatorBasis(2, np.stack([SIGMA_X, IDENTITY_2, SIGMA_Y, SIGMA_Z]))
    with pytest.raises(ValueError):
        OperatorBasis(2, np.stack([IDENTITY_2, SIGMA_X, SIGMA_X, SIGMA_Z]))
    with pytest.raises(DimensionMismatch):
        OperatorBasis(2, np.stack([IDENTITY_2, SIGMA_X, SIGMA_Y]))


def test_vectorize_reference_states():
    plus = 0.5 * (IDENTITY_2 + SIGMA_X)
    assert np.allclose(vectorize(plus, B), [1, 1, 0, 0])
    assert np.allclose(vectorize(np.eye(2) / 2, B), [1, 0, 0, 0])
    one = 0.5 * (IDENTITY_2 - SIGMA_Z)
    assert np.allclose(vectorize(one, B), [1, 0, 0, -1])


def test_vectorize_maximally_mixed_qutrit():
    b = gell_mann_basis(3)
    v = vectorize(np.eye(3) / 3, b)
    assert np.allclose(v, np.eye(9)[0])


def test_devectorize_reference_states():
    assert np.allclose(devectorize([1, 1, 0, 0], B), 0.5 * (IDENTITY_2 + SIGMA_X))
    assert np.allclose(devectorize([1, 0, 0, 0], B), IDENTITY_2 / 2)


def test_devectorize_final_deutsch_state():
    g0, tau, F = 0.1, 3.0, 2
    r = np.exp(-2 * g0 * tau)
    v = [1, r * np.cos(np.pi * F / 2), -r * np.sin(np.pi * F / 2), 0]
    rho = devectorize(v, B)
    expected = 0.5 * (IDENTITY_2 + r * np.cos(np.pi * F / 2) * SIGMA_X - r * np.sin(np.pi * F / 2) * SIGMA_Y)
    assert np.allclose(rho, expected)
    p = dm.DeutschParams(gamma0=g0, tau=tau)
    assert np.allclose(rho, dm.target_state(p))


def test_devectorize_rejects_bad_trace():
    with pytest.raises(InvalidStateError):
        devectorize([1.1, 0, 0, 0], B)
    with pytest.raises(DimensionMismatch):
        devectorize([1, 0, 0], B)


def test_hs_inner_values():
    v = vectorize(np.eye(2) / 2, B)
    assert hs_inner(v, v, B) == pytest.approx(0.25)
    D0 = np.array([1, 0, 0, 0])
    D1 = np.array([0, -np.cos(0.3), np.sin(0.3), 0])
    assert abs(hs_inner(D0, D1, B)) < 1e-15


def test_hs_inner_matches_trace():
    rng = np.random.default_rng(3)
    a, b = random_density(rng, 2), random_density(rng, 2)
    expected = np.trace(a.conj().T @ b) / 2
    assert hs_inner(vectorize(a, B), vectorize(b, B), B) == pytest.approx(expected)


def test_deutsch_left_right_pair_is_normalized():
    p = dm.DeutschParams()
    E, R = dm.left_vectors(p, 1.3), dm.right_vectors(p, 1.3)
    assert E[1] @ R[:, 1] == pytest.approx(1)


def test_build_superop_deutsch_at_start():
    g, w = 0.1, 1.0
    p = dm.DeutschParams(omega=w, gamma0=g)
    M = build_superop(dm.adiabatic_spec(p), B)(0.0)
    expected = np.array([[0, 0, 0, 0], [0, -2 * g, 0, 0], [0, 0, -2 * g, 2 * w], [0, 0, -2 * w, 0]])
    assert np.max(np.abs(M - expected)) < 1e-14


@pytest.mark.parametrize("t", [0.0, 2.5, 5.0, 9.1])
def test_build_superop_deutsch_closed_form(t):
    p = dm.DeutschParams(gamma0=0.07, tau=10.0)
    assert np.max(np.abs(build_superop(dm.adiabatic_spec(p), B)(t) - dm.lindbladian_matrix(p, t))) < 1e-14


def test_build_superop_lz_at_zero_angle():
    p = lz.LZParams(gamma_mode="constant", gamma0=0.2)
    M = build_superop(lz.adiabatic_spec(p), B)(0.0)
    w0, g = p.omega0, p.gamma0
    expected = np.array([[0, 0, 0, 0], [0, -2 * g, -w0, 0], [0, w0, 0, 0], [0, 0, 0, -2 * g]])
    assert np.max(np.abs(M - expected)) < 1e-14


def test_zero_generator():
    spec = LindbladSpec(lambda t: np.zeros((2, 2)), [], dim=2)
    assert np.all(build_superop(spec, B)(0.3) == 0)


def test_hamiltonian_superop_is_antisymmetric():
    M = hamiltonian_superop(0.3 * SIGMA_X + 0.7 * SIGMA_Z, B)
    assert np.max(np.abs(M + M.T)) < 1e-14
    assert np.max(np.abs(M.imag)) < 1e-14


def test_lindblad_spec_rejects_negative_rate():
    spec = LindbladSpec(lambda t: np.zeros((2, 2)), [(SIGMA_Z, lambda t: -1.0)], dim=2)
    with pytest.raises(ValueError):
        spec.rates(0.0)


def test_superop_shape_check():
    bad = Superop(4, lambda t: np.eye(3))
    with pytest.raises(DimensionMismatch):
        bad(0.0)


def test_superop_from_samples_exact_at_nodes():
    ts = np.linspace(0, 1, 5)
    mats = np.array([np.eye(2) * t for t in ts])
    S = Superop.from_samples(ts, mats)
    assert np.allclose(S(0.5), 0.5 * np.eye(2))
    assert np.allclose(S(0.125), 0.125 * np.eye(2))


def test_superop_addition():
    a = Superop.constant(np.eye(4))
    b = Superop(4, lambda t: t * np.eye(4))
    assert np.allclose((a + b)(2.0), 3 * np.eye(4))


def test_check_density_matrix():
    check_density_matrix(np.eye(2) / 2)
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
