"""Landau-Zener qubit under a bit-phase-flip channel.

``H(t) = (w0/2) sigma_z + (w0 tan(theta)/2) sigma_x`` with mixing angle
``theta(t)``, default ``theta0 t / tau``.  The channel is
``gamma(t) (sigma_y rho sigma_y - rho)`` where ``gamma`` is either the
constant ``gamma0`` or ``gamma0 sec(theta(t))``; the latter keeps every
derivative overlap ``<<E|dD/dt>>`` at zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from ..errors import ConfigError, ExceptionalPointError
from ..hs_algebra import SIGMA_X, SIGMA_Y, SIGMA_Z, LindbladSpec, Superop, devectorize, pauli_basis
from ..spectral import Frame, SpectralPath, TimeGrid, make_frame
from .base import Variants

EP_TOL = 1e-6
GAMMA_MODES = ("constant", "sec_theta")


@dataclass(frozen=True)
class LZParams:
    omega0: float = 1.0
    gamma0: float = 0.05
    tau: float = 10.0
    theta0: float = np.pi / 3
    gamma_mode: str = "sec_theta"
    # optional schedule: t -> (theta, theta_dot); default is linear
    schedule: Callable[[float], tuple] | None = None

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ConfigError("omega0 must be positive")
        if self.gamma0 < 0:
            raise ConfigError("gamma0 must be non-negative")
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if not 0 <= self.theta0 < np.pi / 2:
            raise ConfigError("theta0 must lie in [0, pi/2)")
        if self.gamma_mode not in GAMMA_MODES:
            raise ConfigError(f"gamma_mode must be one of {GAMMA_MODES}")

    def theta(self, t: float) -> float:
        return self.schedule(t)[0] if self.schedule else self.theta0 * t / self.tau

    def theta_dot(self, t: float) -> float:
        return self.schedule(t)[1] if self.schedule else self.theta0 / self.tau

    def gamma(self, t: float) -> float:
        if self.gamma_mode == "constant":
            return self.gamma0
        return self.gamma0 / np.cos(self.theta(t))

    def gamma_dot(self, t: float) -> float:
        if self.gamma_mode == "constant":
            return 0.0
        th = self.theta(t)
        return self.gamma0 * np.tan(th) / np.cos(th) * self.theta_dot(t)

    def gamma_integral(self, t: float) -> float:
        """``int_0^t gamma``."""
        if self.gamma_mode == "constant":
            return self.gamma0 * t
        if self.schedule is None:
            if self.theta0 == 0:
                return self.gamma0 * t
            th = self.theta(t)
            return self.gamma0 * self.tau / self.theta0 * np.log(1 / np.cos(th) + np.tan(th))
        return quad(self.gamma, 0.0, t, epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    def kappa(self, t: float) -> complex:
        """``sqrt((gamma cos theta)^2 - w0^2)``, principal branch."""
        gc = self.gamma(t) * np.cos(self.theta(t))
        return np.sqrt(complex(gc**2 - self.omega0**2))

    def varpi(self, t: float) -> float:
        return self.gamma(t) * self.theta_dot(t) * np.tan(self.theta(t)) - self.gamma_dot(t)

    def check(self, times=None):
        if times is None:
            times = np.linspace(0.0, self.tau, 257)
        gc = np.array([self.gamma(t) * np.cos(self.theta(t)) for t in times])
        worst = float(np.min(np.abs(gc - self.omega0))) / self.omega0
        if worst <= EP_TOL:
            raise ExceptionalPointError(
                "gamma(t) cos(theta(t)) reaches omega0: the generator is defective "
                "on the manifold kappa = 0"
            )
        return self


def rho0_vector() -> np.ndarray:
    """Coherence vector of ``|1><1|``."""
    return np.array([1.0, 0.0, 0.0, -1.0], dtype=complex)


def hamiltonian(p: LZParams, t: float) -> np.ndarray:
    return 0.5 * p.omega0 * SIGMA_Z + 0.5 * p.omega0 * np.tan(p.theta(t)) * SIGMA_X


def cd_hamiltonian(p: LZParams, t: float) -> np.ndarray:
    return 0.5 * p.theta_dot(t) * SIGMA_Y


def lindbladian_matrix(p: LZParams, t: float) -> np.ndarray:
    g, w0, tn = p.gamma(t), p.omega0, np.tan(p.theta(t))
    return np.array(
        [
            [0, 0, 0, 0],
            [0, -2 * g, -w0, 0],
            [0, w0, 0, -w0 * tn],
            [0, 0, w0 * tn, -2 * g],
        ],
        dtype=complex,
    )


def cd_matrix_parallel(p: LZParams, t: float) -> np.ndarray:
    """Counter-diabatic correction when ``varpi = 0``."""
    m = np.zeros((4, 4), dtype=complex)
    m[1, 3] = p.theta_dot(t)
    m[3, 1] = -p.theta_dot(t)
    return m


def cd_matrix_listed(p: LZParams, t: float) -> np.ndarray:
    """Hand-reduced entrywise counter-diabatic matrix for general ``varpi``.

    Kept for comparison only: it disagrees with the eigenvector route whenever
    ``varpi != 0`` (see :func:`cd_matrix_general`)."""
    th = p.theta(t)
    k2 = p.kappa(t) ** 2
    wt = p.omega0 * p.varpi(t) * np.cos(th) ** 2
    m = np.zeros((4, 4), dtype=complex)
    m[1, 2] = wt / (2 * k2)
    m[1, 3] = p.theta_dot(t)
    m[2, 1] = -3 * wt / (2 * k2)
    m[2, 3] = 3 * wt * np.tan(th) / (2 * k2)
    m[3, 1] = -p.theta_dot(t)
    m[3, 2] = -wt * np.tan(th) / (2 * k2)
    return m


def cd_matrix_general(p: LZParams, t: float) -> np.ndarray:
    """Counter-diabatic correction for any ``varpi``, reduced from the
    eigenvector sum; equals :func:`cd_matrix_parallel` when ``varpi = 0``."""
    th = p.theta(t)
    k2 = p.kappa(t) ** 2
    a = p.omega0 * p.varpi(t) * np.cos(th) ** 2 / (2 * k2)
    m = cd_matrix_parallel(p, t)
    m[1, 2] = m[2, 1] = -a
    m[2, 3] = m[3, 2] = a * np.tan(th)
    return m


def generalized_matrix(p: LZParams, t: float) -> np.ndarray:
    m = cd_matrix_parallel(p, t)
    dec = -2 * p.gamma0 / np.cos(p.theta(t))
    m[1, 1] = m[2, 2] = m[3, 3] = dec
    return m


def lz_lindbladian(p: LZParams) -> Superop:
    p.check()
    return Superop(4, lambda t: lindbladian_matrix(p, t), "L_LZ")


# ---- GKSL generators -------------------------------------------------


def adiabatic_spec(p: LZParams) -> LindbladSpec:
    return LindbladSpec(lambda t: hamiltonian(p, t), [(SIGMA_Y, p.gamma)], dim=2)


def standard_tqd_spec(p: LZParams) -> LindbladSpec:
    return LindbladSpec(lambda t: hamiltonian(p, t) + cd_hamiltonian(p, t), [(SIGMA_Y, p.gamma)], dim=2)


def generalized_spec(p: LZParams) -> LindbladSpec:
    half = lambda t: 0.5 * p.gamma0 / np.cos(p.theta(t))
    return LindbladSpec(
        lambda t: cd_hamiltonian(p, t), [(SIGMA_X, half), (SIGMA_Y, half), (SIGMA_Z, half)], dim=2
    )


# ---- closed-form eigensystem --------------------------------------------


def eigenvalues(p: LZParams, t: float) -> np.ndarray:
    g, k, c = p.gamma(t), p.kappa(t), np.cos(p.theta(t))
    return np.array([0.0, -2 * g, -g - k / c, -g + k / c], dtype=complex)


def right_vectors(p: LZParams, t: float) -> np.ndarray:
    th = p.theta(t)
    c, s, w0 = np.cos(th), np.sin(th), p.omega0
    gc, k = p.gamma(t) * c, p.kappa(t)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, s, 0, c],
            [0, -c, (gc - k) / w0, s],
            [0, -c, (gc + k) / w0, s],
        ],
        dtype=complex,
    ).T


def right_vectors_dot(p: LZParams, t: float) -> np.ndarray:
    th, thd = p.theta(t), p.theta_dot(t)
    c, s, w0 = np.cos(th), np.sin(th), p.omega0
    g, gd, k = p.gamma(t), p.gamma_dot(t), p.kappa(t)
    gc_dot = gd * c - g * s * thd
    k_dot = g * c * gc_dot / k
    return np.array(
        [
            [0, 0, 0, 0],
            [0, c * thd, 0, -s * thd],
            [0, s * thd, (gc_dot - k_dot) / w0, c * thd],
            [0, s * thd, (gc_dot + k_dot) / w0, c * thd],
        ],
        dtype=complex,
    ).T


def left_vectors(p: LZParams, t: float) -> np.ndarray:
    """Closed-form left eigenvectors as rows."""
    th = p.theta(t)
    c, s, w0 = np.cos(th), np.sin(th), p.omega0
    gc, k = p.gamma(t) * c, p.kappa(t)
    kp, km = 1 + gc / k, 1 - gc / k
    return np.array(
        [
            [1, 0, 0, 0],
            [0, s, 0, c],
            [0, -0.5 * c * kp, -0.5 * w0 / k, 0.5 * s * kp],
            [0, -0.5 * c * km, 0.5 * w0 / k, 0.5 * s * km],
        ],
        dtype=complex,
    )


def berry_overlaps(p: LZParams, t: float) -> tuple[complex, complex]:
    """Closed-form ``<<E_2|dD_2/dt>>`` and ``<<E_3|dD_3/dt>>``."""
    c, k, g = np.cos(p.theta(t)), p.kappa(t), p.gamma(t)
    vp = p.varpi(t)
    return vp * c * (k - g * c) / (2 * k**2), -vp * c * (k + g * c) / (2 * k**2)


def frame(p: LZParams, t: float) -> Frame:
    return make_frame(t, (1, 1, 1, 1), eigenvalues(p, t), right_vectors(p, t), right_vectors_dot(p, t))


def lz_analytic_spectrum(p: LZParams, grid: TimeGrid) -> SpectralPath:
    p.check(grid.points)
    return SpectralPath.from_frames(grid, lambda t: frame(p, t))


# ---- states ---------------------------------------------------------------


def mean_tan(theta0: float) -> float:
    """``-log(cos theta0) / theta0``: the integral of tan over [0, theta0] per unit angle."""
    return -np.log(np.cos(theta0)) / theta0


def mean_sec(theta0: float) -> float:
    """``log(sec theta0 + tan theta0) / theta0``: the integral of sec per unit angle,
    which is what the decay exponent of the sec-mode adiabatic state needs."""
    if theta0 == 0:
        return 1.0
    return np.log(1 / np.cos(theta0) + np.tan(theta0)) / theta0


def adiabatic_vector(p: LZParams, t: float) -> np.ndarray:
    r = np.exp(-2 * p.gamma_integral(t))
    th = p.theta(t)
    return np.array([1.0, -r * np.sin(th), 0.0, -r * np.cos(th)], dtype=complex)


def adiabatic_solution(p: LZParams, t: float) -> np.ndarray:
    return devectorize(adiabatic_vector(p, t), pauli_basis())


def target_state(p: LZParams) -> np.ndarray:
    return adiabatic_solution(p, p.tau)


def target_state_listed(p: LZParams) -> np.ndarray:
    """Final state with the decay exponent ``2 gamma0 tau vartheta`` built from
    :func:`mean_tan`; differs from :func:`target_state` unless theta0 = 0."""
    r = np.exp(-2 * p.gamma0 * p.tau * mean_tan(p.theta0)) if p.theta0 > 0 else np.exp(-2 * p.gamma0 * p.tau)
    v = np.array([1.0, -r * np.sin(p.theta0), 0.0, -r * np.cos(p.theta0)], dtype=complex)
    return devectorize(v, pauli_basis())


def lz_variants(p: LZParams) -> Variants:
    p.check()
    basis = pauli_basis()
    # closed forms of the GKSL generators above (equality is tested)
    L = Superop(4, lambda t: lindbladian_matrix(p, t), "L_LZ")
    if p.gamma_mode == "sec_theta":
        L_std = Superop(4, lambda t: lindbladian_matrix(p, t) + cd_matrix_parallel(p, t), "L_Stqd_LZ")
        L_gen = Superop(4, lambda t: generalized_matrix(p, t), "L_Gtqd_LZ")
    else:
        # varpi != 0: the correction is not a pure Hamiltonian term
        L_std = Superop(4, lambda t: lindbladian_matrix(p, t) + cd_matrix_general(p, t), "L_Stqd_LZ")
        L_gen = None
    return Variants(
        name="landau_zener",
        basis=basis,
        rho0=rho0_vector(),
        tau=p.tau,
        L_adiabatic=L,
        L_standard_tqd=L_std,
        L_generalized=L_gen,
        target_state=target_state(p),
        adiabatic_solution=lambda t: adiabatic_solution(p, t),
        adiabatic_vector=lambda t: adiabatic_vector(p, t),
        frame=lambda t: frame(p, t),
        omega_ref=p.omega0,
    )
