"""Adiabatic propagators, counter-diabatic and generalized transitionless generators.

All synthesis routines work on a :class:`~opentqd.spectral.Frame`.  Public
entry points accept a SpectralPath with an integer grid index, a
JordanStructure with a time, or a Frame directly.

Conventions: right (quasi-)eigenvectors are columns ``R``, lefts are rows
``E = R^-1`` and ``G = E dR/dt`` is the matrix of derivative overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import expm

from .errors import ContractViolation, DimensionMismatch
from .hs_algebra import OperatorBasis, Superop
from .spectral import Frame, JordanStructure, SpectralPath, TimeGrid, as_frame


# --------------------------------------------------------------------------
# small numerical helpers


def fd_derivative(samples: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite-difference derivative along axis 0 of uniform samples."""
    f = np.asarray(samples)
    n = f.shape[0]
    if n < 5:
        return np.gradient(f, h, axis=0, edge_order=2 if n >= 3 else 1)
    d = np.empty_like(f, dtype=np.result_type(f, float))
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d


def _shift(n: int) -> np.ndarray:
    return np.eye(n, k=1)


# --------------------------------------------------------------------------
# phase profiles and block coefficients


@dataclass
class PhaseProfile:
    """Free complex phases ``Theta_a(t)``, one callable per branch."""

    phases: Sequence[Callable[[float], complex]]

    def __len__(self) -> int:
        return len(self.phases)

    def __call__(self, t: float) -> np.ndarray:
        vals = np.array([complex(p(t)) for p in self.phases])
        if not np.all(np.isfinite(vals)):
            raise ContractViolation(f"phase profile is not finite at t={t}")
        return vals

    @classmethod
    def constant(cls, values) -> "PhaseProfile":
        return cls([lambda t, v=complex(v): v for v in values])

    @classmethod
    def from_samples(cls, times, values) -> "PhaseProfile":
        """Piecewise-linear interpolation of sampled phases, shape (n_times, N)."""
        times = np.asarray(times, dtype=float)
        vals = np.asarray(values, dtype=complex)

        def make(a):
            re, im = vals[:, a].real.copy(), vals[:, a].imag.copy()
            return lambda t: complex(np.interp(t, times, re), np.interp(t, times, im))

        return cls([make(a) for a in range(vals.shape[1])])


def _phase_values(thetas, t: float, n: int) -> np.ndarray:
    vals = thetas(t) if isinstance(thetas, PhaseProfile) else np.asarray(thetas, dtype=complex)
    if vals.shape != (n,):
        raise DimensionMismatch(f"expected {n} phases, got {vals.shape}")
    return vals


@dataclass
class BlockCoefficients:
    """Grid-sampled intra-block coefficient paths ``q_a(t)`` and inverses ``q~_a(t)``."""

    grid: TimeGrid
    q: list  # per block, array (n_pts, N_a, N_a)
    q_inv: list

    def __post_init__(self):
        self.q = [np.asarray(a, dtype=complex) for a in self.q]
        self.q_inv = [np.asarray(a, dtype=complex) for a in self.q_inv]

    @property
    def sizes(self) -> tuple:
        return tuple(a.shape[1] for a in self.q)

    def contract_error(self) -> float:
        worst = 0.0
        for q, qi in zip(self.q, self.q_inv):
            eye = np.eye(q.shape[1])
            worst = max(worst, float(np.max(np.abs(q @ qi - eye))))
        return worst

    @classmethod
    def from_q(cls, grid: TimeGrid, q: list) -> "BlockCoefficients":
        q = [np.asarray(a, dtype=complex) for a in q]
        return cls(grid, q, [np.linalg.inv(a) for a in q])

    @classmethod
    def from_phases(cls, grid: TimeGrid, integrated: np.ndarray) -> "BlockCoefficients":
        """1D blocks with ``q_a = exp(int Theta_a)``; ``integrated`` has shape (n_pts, N)."""
        integrated = np.asarray(integrated, dtype=complex)
        q = [np.exp(integrated[:, a]).reshape(-1, 1, 1) for a in range(integrated.shape[1])]
        qi = [np.exp(-integrated[:, a]).reshape(-1, 1, 1) for a in range(integrated.shape[1])]
        return cls(grid, q, qi)


# --------------------------------------------------------------------------
# closed-system helper


def closed_generalized_tqd(state_path: Callable[[float], np.ndarray], thetas, t: float, *,
                           state_dot: Callable[[float], np.ndarray] | None = None,
                           fd_step: float = 1e-4) -> np.ndarray:
    """``H = i sum_n |dn/dt><n| + sum_n theta_n |n><n|`` (hbar = 1).

    ``state_path(t)`` returns a unitary whose columns are the instantaneous
    eigenstates.  With ``theta_n = E_n - i<n|dn/dt>`` this is the standard
    counter-diabatic Hamiltonian plus ``H`` itself.
    """
    U = np.asarray(state_path(t), dtype=complex)
    n = U.shape[1]
    if np.max(np.abs(U.conj().T @ U - np.eye(n))) > 1e-10:
        raise ContractViolation(f"state path is not orthonormal at t={t}")
    if state_dot is not None:
        Ud = np.asarray(state_dot(t), dtype=complex)
    else:
        f = lambda s: np.asarray(state_path(s), dtype=complex)
        h = fd_step
        Ud = (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
    th = _phase_values(thetas, t, n)
    H = 1j * Ud @ U.conj().T + (U * th) @ U.conj().T
    return 0.5 * (H + H.conj().T)


# --------------------------------------------------------------------------
# adiabatic propagators


def adiabatic_phases(path: SpectralPath) -> np.ndarray:
    """Cumulative ``int_{t0}^{t_j} Lambda_a`` with ``Lambda_a = lambda_a - G_aa`` (trapezoid)."""
    if path.rights_dot is None:
        raise ValueError("path has no derivatives; call differentiate_path first")
    G = np.einsum("jab,jba->ja", path.lefts, path.rights_dot)
    Lam = path.eigenvalues - G
    return cumulative_trapezoid(Lam, path.grid.points, axis=0, initial=0)


def adiabatic_propagator_1d(path: SpectralPath, t_index: int, *, phases: np.ndarray | None = None) -> np.ndarray:
    """``V(t_j, t0) = sum_a exp(int Lambda_a) |D_a(t_j)>><<E_a(t0)|``."""
    if not isinstance(path, SpectralPath):
        raise TypeError("adiabatic_propagator_1d needs a one-dimensional SpectralPath")
    ph = adiabatic_phases(path) if phases is None else phases
    return (path.rights[t_index] * np.exp(ph[t_index])) @ path.lefts[0]


def adiabatic_propagator_1d_inverse(path: SpectralPath, t_index: int, *, phases=None) -> np.ndarray:
    """Biorthogonal inverse ``sum_a exp(-int Lambda_a) |D_a(t0)>><<E_a(t_j)|``."""
    ph = adiabatic_phases(path) if phases is None else phases
    return (path.rights[0] * np.exp(-ph[t_index])) @ path.lefts[t_index]


@dataclass
class AdiabaticTransport:
    """Result of integrating the intra-block coefficient ODE on a grid.

    ``v[a][j]`` is the N_a x N_a coefficient matrix of block ``a`` at grid
    point ``j``; ``phase[j, a] = int_{t0}^{t_j} lambda_a``.
    """

    grid: TimeGrid
    sizes: tuple
    v: list
    phase: np.ndarray
    frames: list = field(repr=False, default_factory=list)

    def propagator(self, j: int) -> np.ndarray:
        """``sum_a exp(int lambda_a) sum_{n,m} v_nm |D^n(t_j)>><<E^m(t0)|``."""
        R, E0 = self.frames[j].rights, self.frames[0].lefts
        d = R.shape[0]
        V = np.zeros((d, d), dtype=complex)
        for a, sl in enumerate(self.frames[j].block_slices()):
            V += np.exp(self.phase[j, a]) * R[:, sl] @ self.v[a][j] @ E0[sl, :]
        return V

    def coefficients(self) -> BlockCoefficients:
        """Adiabatic choice ``q_a = exp(int lambda_a) v_a``."""
        q = [np.exp(self.phase[:, a])[:, None, None] * self.v[a] for a in range(len(self.sizes))]
        qi = [np.exp(-self.phase[:, a])[:, None, None] * np.linalg.inv(self.v[a]) for a in range(len(self.sizes))]
        return BlockCoefficients(self.grid, q, qi)

    def ode_residual(self) -> float:
        """``max |dv/dt v^-1 - (N_shift - G)|`` with dv/dt by fourth-order differences."""
        worst = 0.0
        for a, sl in enumerate(self.frames[0].block_slices()):
            vd = fd_derivative(self.v[a], self.grid.h)
            vi = np.linalg.inv(self.v[a])
            N = _shift(self.sizes[a])
            for j, fr in enumerate(self.frames):
                Ga = fr.overlaps()[sl, sl]
                worst = max(worst, float(np.max(np.abs(vd[j] @ vi[j] - (N - Ga)))))
        return worst


def adiabatic_transport(js: JordanStructure, grid: TimeGrid, *, cond_max: float = 1e12) -> AdiabaticTransport:
    """Integrate ``dv_a/dt = (N_shift - G_a) v_a``, ``v_a(t0) = 1`` by RK4 and
    ``int lambda_a`` by Simpson's rule on the same stages."""
    sizes = js.sizes
    ts = grid.points
    frames = [js.frame(t) for t in ts]
    slices = frames[0].block_slices()
    v = [np.empty((ts.size, n, n), dtype=complex) for n in sizes]
    phase = np.zeros((ts.size, len(sizes)), dtype=complex)
    for a, n in enumerate(sizes):
        v[a][0] = np.eye(n)

    def rhs_blocks(fr: Frame):
        G = fr.overlaps()
        return [_shift(n) - G[sl, sl] for n, sl in zip(sizes, slices)]

    A_prev = rhs_blocks(frames[0])
    for j in range(ts.size - 1):
        h = ts[j + 1] - ts[j]
        mid = js.frame(ts[j] + 0.5 * h)
        A_mid = rhs_blocks(mid)
        A_next = rhs_blocks(frames[j + 1])
        for a in range(len(sizes)):
            y = v[a][j]
            k1 = A_prev[a] @ y
            k2 = A_mid[a] @ (y + 0.5 * h * k1)
            k3 = A_mid[a] @ (y + 0.5 * h * k2)
            k4 = A_next[a] @ (y + h * k3)
            v[a][j + 1] = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if np.linalg.cond(v[a][j + 1]) > cond_max:
                raise ContractViolation(f"intra-block coefficients of block {a} became singular at t={ts[j + 1]:.6g}")
        lam0, lamm, lam1 = frames[j].eigenvalues, mid.eigenvalues, frames[j + 1].eigenvalues
        phase[j + 1] = phase[j] + (h / 6.0) * (lam0 + 4 * lamm + lam1)
        A_prev = A_next
    return AdiabaticTransport(grid, sizes, v, phase, frames)


def adiabatic_propagator_multiblock(js: JordanStructure, grid: TimeGrid, t_index: int) -> np.ndarray:
    return adiabatic_transport(js, grid).propagator(t_index)


# --------------------------------------------------------------------------
# counter-diabatic generators


def _need_dot(fr: Frame):
    if fr.rights_dot is None:
        raise ValueError(f"frame at t={fr.t} has no eigenvector derivatives")


def standard_cd(obj, t) -> np.ndarray:
    """Counter-diabatic correction ``sum_k |dD_k>><<E_k| - sum_a R_a G_a E_a``
    where ``G_a`` is the intra-block overlap matrix of block ``a``."""
    fr = as_frame(obj, t)
    _need_dot(fr)
    G = fr.overlaps()
    G_in = np.where(fr.block_mask(), G, 0.0)
    return fr.rights_dot @ fr.lefts - fr.rights @ G_in @ fr.lefts


def standard_cd_via_similarity(obj, t, *, route: str = "closed_form") -> np.ndarray:
    """Counter-diabatic correction from the similarity transform ``C = sum |D>><<sigma|``.

    With canonical reference vectors ``C`` is the right-vector matrix and
    ``C^-1`` the left-vector matrix.  ``dC^-1/dt C`` is taken either in closed
    form as ``-G`` or directly from the left derivatives; its off-block part
    ``L'_nd`` gives the correction ``-C L'_nd C^-1``.
    """
    fr = as_frame(obj, t)
    _need_dot(fr)
    C, Cinv = fr.rights, fr.lefts
    if route == "closed_form":
        M = -(Cinv @ fr.rights_dot)
    elif route == "direct":
        if fr.lefts_dot is None:
            raise ValueError("direct route needs left derivatives")
        M = fr.lefts_dot @ C
    else:
        raise ValueError(f"unknown route {route!r}")
    L_nd = np.where(fr.block_mask(), 0.0, M)
    return -C @ L_nd @ Cinv


def standard_tqd(L: Superop, obj, t) -> np.ndarray:
    fr = as_frame(obj, t)
    return L(fr.t) + standard_cd(fr, None)


def generalized_tqd_1d(obj, thetas, t) -> np.ndarray:
    """``sum_a |dD_a>><<E_a| + Theta_a |D_a>><<E_a|`` for one-dimensional blocks."""
    fr = as_frame(obj, t)
    if not fr.is_1d:
        raise ValueError("generalized_tqd_1d needs one-dimensional blocks")
    _need_dot(fr)
    th = _phase_values(thetas, fr.t, len(fr.sizes))
    return fr.rights_dot @ fr.lefts + (fr.rights * th) @ fr.lefts


def generalized_tqd_multiblock(obj, q: BlockCoefficients, t_index: int, *, contract_tol: float = 1e-8,
                               _qdot=None) -> np.ndarray:
    """``sum_a R_a (dq_a/dt q~_a) E_a + sum_k |dD_k>><<E_k|`` at grid point ``t_index``.

    ``obj`` is a JordanStructure (evaluated at the grid time) or a SpectralPath
    sharing ``q.grid``.  ``dq/dt`` comes from fourth-order differences of the
    sampled q path.
    """
    err = q.contract_error()
    if err > contract_tol:
        raise ContractViolation(f"q q~ deviates from the identity by {err:.2e} (> {contract_tol:g})")
    t = q.grid.points[t_index]
    fr = as_frame(obj, t_index if isinstance(obj, SpectralPath) else t)
    if tuple(fr.sizes) != q.sizes:
        raise DimensionMismatch(f"block sizes {fr.sizes} do not match coefficients {q.sizes}")
    _need_dot(fr)
    qdot = _qdot if _qdot is not None else [fd_derivative(a, q.grid.h) for a in q.q]
    d = fr.dim
    out = fr.rights_dot @ fr.lefts
    for a, sl in enumerate(fr.block_slices()):
        out = out + fr.rights[:, sl] @ (qdot[a][t_index] @ q.q_inv[a][t_index]) @ fr.lefts[sl, :]
    return out.reshape(d, d)


def generalized_tqd_multiblock_path(obj, q: BlockCoefficients) -> np.ndarray:
    """All grid points at once, shape (n_pts, d, d)."""
    qdot = [fd_derivative(a, q.grid.h) for a in q.q]
    return np.array([generalized_tqd_multiblock(obj, q, j, _qdot=qdot) for j in range(len(q.grid))])


# --------------------------------------------------------------------------
# inverse engineering


def inverse_engineer(V, grid: TimeGrid, *, V_inv=None, cond_max: float = 1e12, label: str = "L_ie") -> Superop:
    """Generator ``dV/dt V^-1`` of a propagator path, sampled on ``grid``.

    ``V`` is a Superop or an array of samples (n_pts, d, d).  ``V_inv`` may
    supply the inverse (e.g. assembled biorthogonally); otherwise it is
    computed numerically after a conditioning check.
    """
    ts = grid.points
    Vs = np.array([V(t) for t in ts]) if isinstance(V, Superop) else np.asarray(V, dtype=complex)
    if Vs.shape[0] != ts.size:
        raise DimensionMismatch("need one propagator sample per grid point")
    if V_inv is None:
        conds = np.linalg.cond(Vs)
        bad = np.flatnonzero(~(conds < cond_max))
        if bad.size:
            j = int(bad[0])
            raise ContractViolation(
                f"propagator is not invertible at t={ts[j]:.6g} (condition {conds[j]:.2e}); "
                "the dynamical map has lost invertibility"
            )
        Vi = np.linalg.inv(Vs)
    elif isinstance(V_inv, Superop):
        Vi = np.array([V_inv(t) for t in ts])
    else:
        Vi = np.asarray(V_inv, dtype=complex)
    Vd = fd_derivative(Vs, grid.h)
    return Superop.from_samples(ts, Vd @ Vi, label)


# --------------------------------------------------------------------------
# time-independence machinery


def theorem1_phases(path: SpectralPath) -> PhaseProfile:
    """Phases ``-<<E_a|dD_a/dt>>`` that cancel the time dependence of ``G``."""
    vals = -np.einsum("jab,jba->ja", path.lefts, path.rights_dot)
    return PhaseProfile.from_samples(path.grid.points, vals)


@dataclass
class ConditionReport:
    """Residuals of the two sufficient conditions for a constant generator.

    ``transport_residual[e, b]``: deviation of ``G_eb(t)`` from
    ``G_eb(t0) exp(int (G_ee - G_bb))``.
    ``constancy_residual[e, b]``: ``max_t |dG_eb/dt|``.
    """

    transport_residual: np.ndarray
    constancy_residual: np.ndarray
    tol: float

    @property
    def transport_holds(self) -> bool:
        return bool(np.max(self.transport_residual) < self.tol)

    @property
    def constancy_holds(self) -> bool:
        return bool(np.max(self.constancy_residual) < self.tol)

    @property
    def condition(self) -> str:
        if self.constancy_holds:
            return "constant-overlaps"
        if self.transport_holds:
            return "overlap-transport"
        return "none"


def theorem1_condition_check(path: SpectralPath, *, tol: float = 1e-6) -> ConditionReport:
    G = np.einsum("jab,jbc->jac", path.lefts, path.rights_dot)
    diag = np.einsum("jaa->ja", G)
    integ = cumulative_trapezoid(diag, path.grid.points, axis=0, initial=0)
    expo = integ[:, :, None] - integ[:, None, :]
    predicted = G[0][None, :, :] * np.exp(expo)
    transport = np.max(np.abs(G - predicted), axis=0)
    constancy = np.max(np.abs(fd_derivative(G, path.grid.h)), axis=0)
    return ConditionReport(transport, constancy, tol)


def time_independence_residual(L: Superop, grid: TimeGrid) -> float:
    """``max |dL/dt|`` over grid and entries, by central differences of samples."""
    mats = np.array([L(t) for t in grid.points])
    return float(np.max(np.abs(np.gradient(mats, grid.h, axis=0, edge_order=2))))


def is_time_independent(L: Superop, grid: TimeGrid, *, rel_tol: float = 1e-8) -> bool:
    scale = max(np.linalg.norm(L(t), 2) for t in grid.points)
    return time_independence_residual(L, grid) < rel_tol * max(scale, 1e-300)


# --------------------------------------------------------------------------
# diagnostics


def choi_min_eigenvalue(Lmat: np.ndarray, basis: OperatorBasis, dt: float) -> float:
    """Smallest Choi-matrix eigenvalue of the short-time map ``expm(dt L)``.

    Negative values mean the map is not completely positive.  Reported only;
    synthesized generators are not required to be of GKSL form.
    """
    D = basis.dim
    B = basis.columns
    Phi = B @ expm(dt * np.asarray(Lmat, dtype=complex)) @ B.conj().T / D
    choi = Phi.reshape(D, D, D, D).transpose(2, 0, 3, 1).reshape(D * D, D * D)
    choi = 0.5 * (choi + choi.conj().T)
    return float(np.linalg.eigvalsh(choi).min())


def block_projections(states: np.ndarray, frame_lefts: np.ndarray) -> np.ndarray:
    """``<<E_a(t_j)|rho(t_j)>>`` for every grid point; lefts shape (n_pts, N, d)."""
    return np.einsum("jad,jd->ja", frame_lefts, states)
