"""Fixed-step integration of superoperator master equations and state observables."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IntegrationError, InvalidStateError
from .hs_algebra import OperatorBasis, SIGMA_X, SIGMA_Y, SIGMA_Z, Superop, basis_for_dim, devectorize
from .spectral import TimeGrid

log = logging.getLogger(__name__)

TRACE_FLAG = 1e-8
TRACE_FAIL = 1e-6
POS_SLACK = 1e-8


def default_steps(t0: float, t1: float, omega_ref: float = 1.0) -> int:
    return max(4000, math.ceil(400 * (t1 - t0) * omega_ref))


@dataclass
class Trajectory:
    """Coherence vectors on a grid plus per-point monitors.

    ``monitors`` holds arrays ``trace_dev``, ``min_eig`` and ``purity``;
    ``flags`` lists human-readable notes (trace drift above 1e-8, etc.).
    """

    grid: TimeGrid
    states: np.ndarray
    basis: OperatorBasis
    monitors: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def density(self, j: int) -> np.ndarray:
        return devectorize(self.states[j], self.basis, trace_tol=TRACE_FAIL)


def _rk4(L: Superop, rho0: np.ndarray, ts: np.ndarray) -> np.ndarray:
    out = np.empty((ts.size, rho0.size), dtype=complex)
    out[0] = rho0
    y = rho0.astype(complex)
    L_start = L(ts[0])
    for j in range(ts.size - 1):
        t, h = ts[j], ts[j + 1] - ts[j]
        Lm = L(t + 0.5 * h)
        L_end = L(ts[j + 1])
        k1 = L_start @ y
        k2 = Lm @ (y + 0.5 * h * k1)
        k3 = Lm @ (y + 0.5 * h * k2)
        k4 = L_end @ (y + h * k3)
        L_start = L_end
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(
                f"state became non-finite at t={ts[j + 1]:.6g} with step {h:.3e}; "
                "the generator is too stiff for this step, increase n_steps"
            )
        out[j + 1] = y
    return out


def integrate(
    L: Superop,
    rho0,
    grid: TimeGrid,
    *,
    basis: OperatorBasis | None = None,
    self_check: bool = False,
    check_tol: float = 1e-8,
    monitors: bool = True,
) -> Trajectory:
    """Classical RK4 for ``d|rho>>/dt = L(t)|rho>>`` on a fixed grid.

    With ``self_check`` the run is repeated at half the step and the final
    states must agree within ``check_tol`` in max norm.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (L.dim_sq,):
        raise DimensionMismatch(f"initial vector has shape {rho0.shape}, generator is {L.dim_sq}x{L.dim_sq}")
    dim = math.isqrt(L.dim_sq)
    basis = basis or basis_for_dim(dim)
    states = _rk4(L, rho0, grid.points)
    traj = Trajectory(grid, states, basis)

    trace_dev = np.abs(states[:, 0] - rho0[0])
    worst = float(trace_dev.max())
    if worst > TRACE_FAIL:
        raise IntegrationError(f"trace component drifted by {worst:.2e} (> {TRACE_FAIL:g})")
    if worst > TRACE_FLAG:
        traj.flags.append(f"trace drift {worst:.2e} exceeds {TRACE_FLAG:g}")
    traj.monitors["trace_dev"] = trace_dev

    if self_check:
        fine = _rk4(L, rho0, grid.refined(2).points)
        diff = float(np.max(np.abs(fine[-1] - states[-1])))
        traj.monitors["halving_diff"] = diff
        if diff > check_tol:
            raise IntegrationError(
                f"step-halving changed the final state by {diff:.2e} (> {check_tol:g}); "
                f"increase n_steps beyond {grid.n_steps}"
            )

    if monitors:
        min_eig = np.empty(len(grid))
        pur = np.empty(len(grid))
        for j in range(len(grid)):
            rho = traj.density(j)
            min_eig[j] = np.linalg.eigvalsh(rho).min()
            pur[j] = float(np.real(np.trace(rho @ rho)))
        traj.monitors["min_eig"] = min_eig
        traj.monitors["purity"] = pur
        if min_eig.min() < -POS_SLACK:
            traj.flags.append(f"reconstructed state has eigenvalue {min_eig.min():.2e}")
    return traj


def _psd_sqrt(rho: np.ndarray, name: str) -> np.ndarray:
    w, U = np.linalg.eigh(rho)
    if w.min() < -POS_SLACK:
        raise InvalidStateError(f"{name} has eigenvalue {w.min():.3e} below -{POS_SLACK:g}")
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    return (U * np.sqrt(w)) @ U.conj().T


def _clean(rho, name) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"{name} is not a square matrix")
    return 0.5 * (rho + rho.conj().T)


def fidelity(rho, target) -> float:
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho) target sqrt(rho))``."""
    a, b = _clean(rho, "rho"), _clean(target, "target")
    if a.shape != b.shape:
        raise DimensionMismatch(f"states have shapes {a.shape} and {b.shape}")
    sa = _psd_sqrt(a, "rho")
    sb = _psd_sqrt(b, "target")
    b = sb @ sb
    m = sa @ b @ sa
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return min(1.0, float(np.sum(np.sqrt(np.clip(w, 0.0, None)))))


def bloch_vector(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionMismatch("Bloch vectors are defined for qubits only")
    return np.array([np.trace(rho @ s).real for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)])


def purity(rho) -> float:
    rho = _clean(rho, "rho")
    return float(np.real(np.trace(rho @ rho)))
