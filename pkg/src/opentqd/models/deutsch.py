"""Adiabatic Deutsch algorithm on one qubit under pure dephasing.

The interpolating Hamiltonian is ``H(t) = -w g_c sigma_x + w g_s sigma_y``
with ``g_c = cos(phi)``, ``g_s = sin(phi)`` and ``phi(t) = pi F t / (2 tau)``,
where ``F = 1 - (-1)^(f0 + f1)`` is 0 for a constant oracle and 2 for a
balanced one.  Dephasing acts through ``gamma0 (sigma_z rho sigma_z - rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ExceptionalPointError
from ..hs_algebra import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    LindbladSpec,
    Superop,
    devectorize,
    pauli_basis,
)
from ..spectral import Frame, SpectralPath, TimeGrid, make_frame
from .base import Variants

EP_TOL = 1e-6


@dataclass(frozen=True)
class DeutschParams:
    omega: float = 1.0
    gamma0: float = 0.1
    tau: float = 10.0
    f0: int = 0
    f1: int = 1

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigError("omega must be positive")
        if self.gamma0 < 0:
            raise ConfigError("gamma0 must be non-negative")
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if self.f0 not in (0, 1) or self.f1 not in (0, 1):
            raise ConfigError("f0 and f1 must be bits")

    @property
    def F(self) -> int:
        return 1 - (-1) ** (self.f0 + self.f1)

    @property
    def phi_dot(self) -> float:
        return np.pi * self.F / (2 * self.tau)

    def phi(self, t: float) -> float:
        return self.phi_dot * t

    @property
    def delta(self) -> complex:
        """``sqrt(gamma0^2 - 4 w^2)`` on the principal branch."""
        return np.sqrt(complex(self.gamma0**2 - 4 * self.omega**2))

    @property
    def delta_plus(self) -> complex:
        return -self.gamma0 + self.delta

    @property
    def delta_minus(self) -> complex:
        return -self.gamma0 - self.delta

    def check(self):
        if abs(self.gamma0 - 2 * self.omega) / (2 * self.omega) <= EP_TOL:
            raise ExceptionalPointError(
                f"gamma0={self.gamma0} sits on the exceptional point gamma0 = 2 omega "
                "where the generator is defective"
            )
        return self


def rho0_vector() -> np.ndarray:
    """Coherence vector of ``|+><+|``."""
    return np.array([1.0, 1.0, 0.0, 0.0], dtype=complex)


def hamiltonian(p: DeutschParams, t: float) -> np.ndarray:
    ph = p.phi(t)
    return -p.omega * np.cos(ph) * SIGMA_X + p.omega * np.sin(ph) * SIGMA_Y


def cd_hamiltonian(p: DeutschParams) -> np.ndarray:
    return -(p.phi_dot / 2) * SIGMA_Z


def lindbladian_matrix(p: DeutschParams, t: float) -> np.ndarray:
    g, w = p.gamma0, p.omega
    gc, gs = np.cos(p.phi(t)), np.sin(p.phi(t))
    return np.array(
        [
            [0, 0, 0, 0],
            [0, -2 * g, 0, 2 * w * gs],
            [0, 0, -2 * g, 2 * w * gc],
            [0, -2 * w * gs, -2 * w * gc, 0],
        ],
        dtype=complex,
    )


def cd_matrix(p: DeutschParams) -> np.ndarray:
    """Counter-diabatic correction for a constant rate."""
    m = np.zeros((4, 4), dtype=complex)
    m[1, 2] = p.phi_dot
    m[2, 1] = -p.phi_dot
    return m


def time_independent_matrix(p: DeutschParams) -> np.ndarray:
    m = cd_matrix(p)
    m[1, 1] = m[2, 2] = m[3, 3] = -2 * p.gamma0
    return m


def deutsch_lindbladian(p: DeutschParams) -> Superop:
    p.check()
    return Superop(4, lambda t: lindbladian_matrix(p, t), "L_DA")


# ---- GKSL generators -------------------------------------------------


def adiabatic_spec(p: DeutschParams) -> LindbladSpec:
    return LindbladSpec(lambda t: hamiltonian(p, t), [(SIGMA_Z, p.gamma0)], dim=2)


def standard_tqd_spec(p: DeutschParams) -> LindbladSpec:
    Hcd = cd_hamiltonian(p)
    return LindbladSpec(lambda t: hamiltonian(p, t) + Hcd, [(SIGMA_Z, p.gamma0)], dim=2)


def generalized_spec(p: DeutschParams) -> LindbladSpec:
    Hcd = cd_hamiltonian(p)
    half = p.gamma0 / 2
    return LindbladSpec(lambda t: Hcd, [(SIGMA_X, half), (SIGMA_Y, half), (SIGMA_Z, half)], dim=2)


# ---- closed-form eigensystem --------------------------------------------


def right_vectors(p: DeutschParams, t: float) -> np.ndarray:
    w, dp, dm = p.omega, p.delta_plus, p.delta_minus
    gc, gs = np.cos(p.phi(t)), np.sin(p.phi(t))
    return np.array(
        [
            [1, 0, 0, 0],
            [0, -gc, gs, 0],
            [0, -2 * w * gs / dp, -2 * w * gc / dp, 1],
            [0, -2 * w * gs / dm, -2 * w * gc / dm, 1],
        ],
        dtype=complex,
    ).T


def right_vectors_dot(p: DeutschParams, t: float) -> np.ndarray:
    w, dp, dm, pd = p.omega, p.delta_plus, p.delta_minus, p.phi_dot
    gc, gs = np.cos(p.phi(t)), np.sin(p.phi(t))
    return pd * np.array(
        [
            [0, 0, 0, 0],
            [0, gs, gc, 0],
            [0, -2 * w * gc / dp, 2 * w * gs / dp, 0],
            [0, -2 * w * gc / dm, 2 * w * gs / dm, 0],
        ],
        dtype=complex,
    ).T


def left_vectors(p: DeutschParams, t: float) -> np.ndarray:
    """Closed-form left eigenvectors as rows (equal to the inverse of the rights)."""
    w, d, dp, dm = p.omega, p.delta, p.delta_plus, p.delta_minus
    gc, gs = np.cos(p.phi(t)), np.sin(p.phi(t))
    return np.array(
        [
            [1, 0, 0, 0],
            [0, -gc, gs, 0],
            [0, w * gs / d, w * gc / d, dp / (2 * d)],
            [0, -w * gs / d, -w * gc / d, -dm / (2 * d)],
        ],
        dtype=complex,
    )


def eigenvalues(p: DeutschParams) -> np.ndarray:
    return np.array([0.0, -2 * p.gamma0, p.delta_minus, p.delta_plus], dtype=complex)


def frame(p: DeutschParams, t: float) -> Frame:
    p.check()
    return make_frame(t, (1, 1, 1, 1), eigenvalues(p), right_vectors(p, t), right_vectors_dot(p, t))


def deutsch_analytic_spectrum(p: DeutschParams, grid: TimeGrid) -> SpectralPath:
    p.check()
    return SpectralPath.from_frames(grid, lambda t: frame(p, t))


# ---- free-phase generalized generators ------------------------------------


def phase3_antisymmetric(p: DeutschParams, theta2: complex) -> complex:
    """Third free phase that makes the 3x3 dynamical block antisymmetric."""
    return (p.delta_minus * theta2 - 4 * p.gamma0 * p.delta) / p.delta_plus


def generalized_matrix_free(p: DeutschParams, t: float, theta2: complex, theta3: complex,
                            *, verbatim: bool = True) -> np.ndarray:
    """Generalized generator with phases ``(0, -2 gamma0, theta2, theta3)``,
    written out entrywise from the free-phase parametrisation.

    ``verbatim=True`` keeps the listed form (``sin(F pi t)`` in the mixing
    term, ``theta2 - theta3`` in entries (1,3) and (3,2)), which agrees with
    the eigenvector route only when ``theta2 = theta3`` and ``tau = 1``.
    ``verbatim=False`` uses ``sin(F pi t / tau)`` and ``theta3 - theta2``
    throughout, which matches the eigenvector route for all phases.
    """
    g0, w, d, dp, dm = p.gamma0, p.omega, p.delta, p.delta_plus, p.delta_minus
    tau, F = p.tau, p.F
    gc, gs = np.cos(p.phi(t)), np.sin(p.phi(t))
    chi_p = (dp * theta3 - dm * theta2) / (2 * d)
    chi_m = (-dm * theta3 + dp * theta2) / (2 * d)
    gam_p = -g0 * (1 + gc**2 - gs**2)
    gam_m = -g0 * (1 - gc**2 + gs**2)
    arg = F * np.pi * t if verbatim else F * np.pi * t / tau
    chi_t = np.sin(arg) * (2 * g0 + chi_p)
    eta1 = gam_p + gs**2 * chi_p
    eta2 = gam_m + gc**2 * chi_p
    t32 = theta3 - theta2
    t23 = theta2 - theta3 if verbatim else t32
    return np.array(
        [
            [0, 0, 0, 0],
            [0, eta1, (tau * chi_t + F * np.pi) / (2 * tau), w * t23 * gs / d],
            [0, (tau * chi_t - F * np.pi) / (2 * tau), eta2, w * t32 * gc / d],
            [0, -w * t32 * gs / d, -w * t23 * gc / d, chi_m],
        ],
        dtype=complex,
    )


def generalized_matrix_antisym(p: DeutschParams, t: float, theta2: complex) -> np.ndarray:
    """Generalized generator after fixing the third phase for antisymmetry."""
    g0, w, dp, dm = p.gamma0, p.omega, p.delta_plus, p.delta_minus
    gc, gs = np.cos(p.phi(t)), np.sin(p.phi(t))
    tt = 2 * w * (2 * g0 + theta2) / dp
    return np.array(
        [
            [0, 0, 0, 0],
            [0, -2 * g0, p.phi_dot, -tt * gs],
            [0, -p.phi_dot, -2 * g0, -tt * gc],
            [0, tt * gs, tt * gc, -2 * g0 * (theta2 - dm) / dp],
        ],
        dtype=complex,
    )


# ---- states ---------------------------------------------------------------


def adiabatic_vector(p: DeutschParams, t: float) -> np.ndarray:
    r = np.exp(-2 * p.gamma0 * t)
    ph = p.phi(t)
    return np.array([1.0, r * np.cos(ph), -r * np.sin(ph), 0.0], dtype=complex)


def adiabatic_solution(p: DeutschParams, t: float) -> np.ndarray:
    return devectorize(adiabatic_vector(p, t), pauli_basis())


def target_state(p: DeutschParams) -> np.ndarray:
    return adiabatic_solution(p, p.tau)


def deutsch_variants(p: DeutschParams) -> Variants:
    p.check()
    basis = pauli_basis()
    cd = cd_matrix(p)
    # closed forms of the GKSL generators above (equality is tested)
    return Variants(
        name="deutsch",
        basis=basis,
        rho0=rho0_vector(),
        tau=p.tau,
        L_adiabatic=Superop(4, lambda t: lindbladian_matrix(p, t), "L_DA"),
        L_standard_tqd=Superop(4, lambda t: lindbladian_matrix(p, t) + cd, "L_Stqd_DA"),
        L_generalized=Superop.constant(time_independent_matrix(p), "L_ti_DA"),
        target_state=target_state(p),
        adiabatic_solution=lambda t: adiabatic_solution(p, t),
        adiabatic_vector=lambda t: adiabatic_vector(p, t),
        frame=lambda t: frame(p, t),
        omega_ref=p.omega,
    )
