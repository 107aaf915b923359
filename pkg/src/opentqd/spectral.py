"""Eigen- and quasi-eigensystems of superoperators along a time grid.

Right eigenvectors are stored as columns, left eigenvectors as rows, and the
lefts are always the rows of the inverse of the right-eigenvector matrix, so
``lefts @ rights == 1`` holds by construction.  Multi-dimensional Jordan
structures are never inferred numerically; callers supply them through
:class:`JordanStructure`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatch, ExceptionalPointError, GaugeAmbiguity
from .hs_algebra import Superop

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_j = t0 + j (t1 - t0) / n_steps`` for ``j = 0..n_steps``."""

    t0: float
    t1: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ValueError("n_steps must be an integer >= 2")
        if not self.t1 > self.t0:
            raise ValueError("t1 must be greater than t0")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def h(self) -> float:
        return (self.t1 - self.t0) / self.n_steps

    @property
    def points(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    def __len__(self) -> int:
        return self.n_steps + 1

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t0, self.t1, self.n_steps * factor)


@dataclass
class Frame:
    """(Quasi-)eigenframe of a superoperator at a single time.

    ``rights[:, k]`` and ``lefts[k, :]`` are ordered block-major, rank-minor;
    ``eigenvalues[a]`` belongs to block ``a`` of size ``sizes[a]``.
    """

    t: float
    sizes: tuple
    eigenvalues: np.ndarray
    rights: np.ndarray
    lefts: np.ndarray
    rights_dot: np.ndarray | None = None
    lefts_dot: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.rights.shape[0]

    @property
    def is_1d(self) -> bool:
        return all(n == 1 for n in self.sizes)

    def block_slices(self) -> list[slice]:
        out, start = [], 0
        for n in self.sizes:
            out.append(slice(start, start + n))
            start += n
        return out

    def diagonal_eigenvalues(self) -> np.ndarray:
        """Eigenvalue attached to every column."""
        return np.repeat(self.eigenvalues, self.sizes)

    def block_mask(self) -> np.ndarray:
        """Boolean N x N mask of entries inside a common block."""
        labels = np.repeat(np.arange(len(self.sizes)), self.sizes)
        return labels[:, None] == labels[None, :]

    def overlaps(self) -> np.ndarray:
        """``G[m, n] = <<E_m | dD_n/dt>>`` over all columns."""
        if self.rights_dot is None:
            raise ValueError("frame has no derivatives")
        return self.lefts @ self.rights_dot

    def reconstruct(self) -> np.ndarray:
        """Quasi-spectral sum ``sum |D^{n-1}>><<E^n| + lambda |D^n>><<E^n|``."""
        J = np.diag(self.diagonal_eigenvalues()).astype(complex)
        for sl in self.block_slices():
            for k in range(sl.start + 1, sl.stop):
                J[k - 1, k] = 1.0
        return self.rights @ J @ self.lefts


@dataclass
class SpectralPath:
    """Grid-sampled eigensystem of a diagonalizable superoperator.

    Arrays are indexed by grid point first: ``eigenvalues[j, a]``,
    ``rights[j, :, a]`` (column vectors), ``lefts[j, a, :]`` (row vectors).
    """

    grid: TimeGrid
    eigenvalues: np.ndarray
    rights: np.ndarray
    lefts: np.ndarray
    rights_dot: np.ndarray | None = None
    lefts_dot: np.ndarray | None = None
    diagonalizable: bool = True
    smoothed: bool = False
    warnings: list = field(default_factory=list)
    eigen_residual: float = float("nan")

    @property
    def n_branches(self) -> int:
        return self.eigenvalues.shape[1]

    @property
    def sizes(self) -> tuple:
        return (1,) * self.n_branches

    def frame(self, j: int) -> Frame:
        return Frame(
            t=float(self.grid.points[j]),
            sizes=self.sizes,
            eigenvalues=self.eigenvalues[j],
            rights=self.rights[j],
            lefts=self.lefts[j],
            rights_dot=None if self.rights_dot is None else self.rights_dot[j],
            lefts_dot=None if self.lefts_dot is None else self.lefts_dot[j],
        )

    def projectors(self, j: int) -> np.ndarray:
        """Gauge-invariant dyads ``|D_a>><<E_a|`` at grid point ``j``, shape (N, d, d)."""
        return np.einsum("ia,aj->aij", self.rights[j], self.lefts[j])

    def biorthonormality_error(self) -> float:
        eye = np.eye(self.n_branches)
        return float(np.max(np.abs(self.lefts @ self.rights - eye)))

    def completeness_error(self) -> float:
        eye = np.eye(self.rights.shape[1])
        return float(np.max(np.abs(self.rights @ self.lefts - eye)))

    def max_eigenvalue_jump(self) -> float:
        return float(np.max(np.abs(np.diff(self.eigenvalues, axis=0)), initial=0.0))

    @classmethod
    def from_frames(cls, grid: TimeGrid, frame_at: Callable[[float], Frame]) -> "SpectralPath":
        """Sample a closed-form frame function (1D blocks) on ``grid``."""
        frames = [frame_at(t) for t in grid.points]
        if not all(f.is_1d for f in frames):
            raise ValueError("SpectralPath requires one-dimensional blocks")
        has_dot = frames[0].rights_dot is not None
        return cls(
            grid=grid,
            eigenvalues=np.array([f.eigenvalues for f in frames], dtype=complex),
            rights=np.array([f.rights for f in frames], dtype=complex),
            lefts=np.array([f.lefts for f in frames], dtype=complex),
            rights_dot=np.array([f.rights_dot for f in frames], dtype=complex) if has_dot else None,
            lefts_dot=np.array([f.lefts_dot for f in frames], dtype=complex) if has_dot else None,
            smoothed=True,
        )


def make_frame(t, sizes, eigenvalues, rights, rights_dot=None) -> Frame:
    """Complete a frame from right vectors: lefts by inversion, left derivatives
    from ``d(R^-1)/dt = -R^-1 dR/dt R^-1``."""
    rights = np.asarray(rights, dtype=complex)
    lefts = np.linalg.inv(rights)
    lefts_dot = None
    if rights_dot is not None:
        rights_dot = np.asarray(rights_dot, dtype=complex)
        lefts_dot = -lefts @ rights_dot @ lefts
    return Frame(
        t=float(t),
        sizes=tuple(int(n) for n in sizes),
        eigenvalues=np.asarray(eigenvalues, dtype=complex),
        rights=rights,
        lefts=lefts,
        rights_dot=rights_dot,
        lefts_dot=lefts_dot,
    )


# --------------------------------------------------------------------------
# pointwise eigensolve + gauge fixing


def _canonical_order(vals: np.ndarray) -> np.ndarray:
    return np.lexsort((np.round(vals.imag, 9), -np.round(vals.real, 9)))


def _phase_fix_largest(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def eigensystem_path(
    L: Superop,
    grid: TimeGrid,
    *,
    cond_max: float = 1e10,
    smooth: bool = True,
) -> SpectralPath:
    """Eigenvalues and biorthonormal eigenvectors of ``L(t_j)`` on every grid point.

    Raises :class:`ExceptionalPointError` when the right-eigenvector matrix has
    condition number above ``cond_max`` (a numerically defective point).
    With ``smooth`` (default) the result is passed through :func:`gauge_smooth`.
    """
    ts = grid.points
    d = L.dim_sq
    vals = np.empty((ts.size, d), dtype=complex)
    rights = np.empty((ts.size, d, d), dtype=complex)
    lefts = np.empty((ts.size, d, d), dtype=complex)
    resid = 0.0
    for j, t in enumerate(ts):
        M = L(t)
        w, V = np.linalg.eig(M)
        cond = np.linalg.cond(V)
        if not np.isfinite(cond) or cond > cond_max:
            raise ExceptionalPointError(
                f"eigenvector matrix of {L.label or 'superoperator'} has condition number "
                f"{cond:.3e} at t={t:.6g}; the generator is (near) defective there. "
                "Supply a JordanStructure instead of a diagonalizable path.",
                t=float(t),
            )
        W = np.linalg.inv(V)
        scale = max(1.0, np.linalg.norm(M, 2))
        resid = max(
            resid,
            np.max(np.abs(M @ V - V * w)) / scale,
            np.max(np.abs(W @ M - w[:, None] * W)) / scale,
        )
        vals[j], rights[j], lefts[j] = w, V, W
    path = SpectralPath(grid, vals, rights, lefts, eigen_residual=float(resid))
    return gauge_smooth(path) if smooth else path


def _clusters(vals: np.ndarray, tol: float) -> list[list[int]]:
    n = vals.size
    seen = np.zeros(n, dtype=bool)
    out = []
    for a in range(n):
        if seen[a]:
            continue
        members = [a]
        seen[a] = True
        grow = True
        while grow:
            grow = False
            for b in range(n):
                if not seen[b] and np.min(np.abs(vals[members] - vals[b])) <= tol:
                    members.append(b)
                    seen[b] = True
                    grow = True
        out.append(sorted(members))
    return out


def _assign(pred, new_vals, prev_lefts, prev_rights, new_vecs, cluster_tol, amb_tol, t):
    """perm[a] = index of the new eigenpair continuing branch a."""
    cost = np.abs(pred[:, None] - new_vals[None, :])
    rows, perm = linear_sum_assignment(cost)
    perm = perm[np.argsort(rows)]
    n = perm.size
    # biorthogonal overlap: ~1 for the continuing branch, ~0 otherwise
    prev_norms = np.linalg.norm(prev_rights, axis=0)
    ov = np.abs(prev_lefts @ new_vecs) * prev_norms[:, None] / np.linalg.norm(new_vecs, axis=0)[None, :]
    for a in range(n):
        for b in range(a + 1, n):
            pa, pb = perm[a], perm[b]
            if abs(new_vals[pa] - new_vals[pb]) <= cluster_tol:
                continue  # degenerate: resolved by the subspace fit
            delta = cost[a, pb] + cost[b, pa] - cost[a, pa] - cost[b, pb]
            if delta >= amb_tol:
                continue
            kept = ov[a, pa] + ov[b, pb]
            swapped = ov[a, pb] + ov[b, pa]
            if swapped > kept + 0.5:
                perm[a], perm[b] = pb, pa
            elif not kept > swapped + 0.5:
                raise GaugeAmbiguity(
                    f"branches {a} and {b} cannot be told apart at t={t:.6g} "
                    f"(pairing costs differ by {delta:.2e}); refine the time grid",
                    t=float(t),
                )
    return perm


def gauge_smooth(path: SpectralPath, *, cluster_tol: float = 1e-8, amb_tol: float = 1e-12) -> SpectralPath:
    """Make eigenvalue branches and eigenvector gauges continuous along the grid.

    * t0: canonical eigenvalue order; each right vector's largest component
      made real positive.
    * later points: branches matched to a linear extrapolation of the previous
      two points by minimal total distance; degenerate clusters are rotated onto
      the previous vectors by least squares; each vector's phase is aligned with
      its predecessor and its norm held at the predecessor's norm.
    * lefts are recomputed as the inverse of the right matrix.
    """
    vals_in, rights_in = path.eigenvalues, path.rights
    n_pts, d, N = rights_in.shape
    scale = max(1.0, float(np.max(np.abs(vals_in))))
    ctol, atol = cluster_tol * scale, amb_tol * scale
    ts = path.grid.points

    vals = np.empty_like(vals_in)
    rights = np.empty_like(rights_in)
    lefts = np.empty((n_pts, N, d), dtype=complex)

    order = _canonical_order(vals_in[0])
    vals[0] = vals_in[0][order]
    V = rights_in[0][:, order].copy()
    for a in range(N):
        V[:, a] = _phase_fix_largest(V[:, a])
    rights[0] = V
    lefts[0] = np.linalg.inv(V)

    for j in range(1, n_pts):
        pred = vals[j - 1] if j == 1 else 2 * vals[j - 1] - vals[j - 2]
        perm = _assign(pred, vals_in[j], lefts[j - 1], rights[j - 1], rights_in[j], ctol, atol, ts[j])
        vj = vals_in[j][perm]
        Vj = rights_in[j][:, perm].copy()
        prev = rights[j - 1]
        for members in _clusters(vj, ctol):
            if len(members) > 1:
                R, *_ = np.linalg.lstsq(Vj[:, members], prev[:, members], rcond=None)
                Vj[:, members] = Vj[:, members] @ R
            for a in members:
                v, p = Vj[:, a], prev[:, a]
                s = np.vdot(v, p)  # conj(v) . p
                if abs(s) > 0:
                    v = v * (s / abs(s))
                Vj[:, a] = v * (np.linalg.norm(p) / np.linalg.norm(v))
        vals[j] = vj
        rights[j] = Vj
        lefts[j] = np.linalg.inv(Vj)

    return replace(
        path,
        eigenvalues=vals,
        rights=rights,
        lefts=lefts,
        rights_dot=None,
        lefts_dot=None,
        smoothed=True,
    )


def differentiate_path(path: SpectralPath, *, richardson_tol: float = 1e-5) -> SpectralPath:
    """Fill ``rights_dot``/``lefts_dot`` by finite differences along the grid.

    Second-order central differences inside, second-order one-sided at the
    ends.  Left derivatives come from ``dE/dt = -E (dD/dt) E`` so that
    ``<<dE_m/dt|D_n>> = -<<E_m|dD_n/dt>>`` holds exactly.  A step-doubling
    estimate of the truncation error is attached to ``path.warnings`` when it
    exceeds ``richardson_tol`` relative to the derivative scale.
    """
    h = path.grid.h
    R = path.rights
    Rd = np.gradient(R, h, axis=0, edge_order=2)
    Ed = -np.einsum("jab,jbc,jcd->jad", path.lefts, Rd, path.lefts)
    warnings = list(path.warnings)
    if R.shape[0] >= 5:
        Rd2 = np.gradient(R[::2], 2 * h, axis=0, edge_order=2)
        err = np.max(np.abs(Rd[::2] - Rd2)) / 3.0
        span = path.grid.t1 - path.grid.t0
        denom = max(np.max(np.abs(Rd)), np.max(np.abs(R)) / span)
        if err / denom > richardson_tol:
            msg = (
                f"eigenvector derivative error estimate {err / denom:.2e} exceeds "
                f"{richardson_tol:g}; refine the grid (n_steps={path.grid.n_steps})"
            )
            log.warning(msg)
            warnings.append(msg)
    return replace(path, rights_dot=Rd, lefts_dot=Ed, warnings=warnings)


def spectral_path(L: Superop, grid: TimeGrid, **kwargs) -> SpectralPath:
    """Smoothed and differentiated eigensystem path in one call."""
    return differentiate_path(eigensystem_path(L, grid, **kwargs))


def overlap_matrix(path, t_index: int) -> np.ndarray:
    """``G[eta, beta] = <<E_eta(t)|dD_beta/dt(t)>>`` at grid point ``t_index``."""
    if path.rights_dot is None:
        raise ValueError("path has no derivatives; call differentiate_path first")
    return path.lefts[t_index] @ path.rights_dot[t_index]


def match_branches(vals_a, vals_b) -> np.ndarray:
    """Permutation p with ``vals_b[p]`` closest to ``vals_a`` elementwise."""
    cost = np.abs(np.asarray(vals_a)[:, None] - np.asarray(vals_b)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return cols[np.argsort(rows)]


# --------------------------------------------------------------------------
# caller-supplied Jordan structures


def _fd5(fn, t, h):
    return (fn(t - 2 * h) - 8 * fn(t - h) + 8 * fn(t + h) - fn(t + 2 * h)) / (12 * h)


@dataclass
class JordanBlock:
    """One Jordan block: eigenvalue path and its ordered right quasi-eigenvectors.

    ``rights(t)`` returns a (d, size) array with columns ``D^1 .. D^size``
    satisfying ``L D^n = D^{n-1} + lambda D^n``.
    """

    eigenvalue: Callable[[float], complex]
    size: int
    rights: Callable[[float], np.ndarray]
    rights_dot: Callable[[float], np.ndarray] | None = None


@dataclass
class JordanStructure:
    """Analytically supplied Jordan decomposition ``L = S (+) J_k[lambda_k] S^-1``.

    Left quasi-eigenvectors are rows of ``S^-1`` and satisfy the rank-raising
    relation ``E^n L = E^{n+1} + lambda E^n``.  Missing right derivatives are
    taken by a five-point central difference with step ``fd_step``.
    """

    blocks: Sequence[JordanBlock]
    fd_step: float = 1e-3

    @property
    def sizes(self) -> tuple:
        return tuple(b.size for b in self.blocks)

    def _rights(self, t):
        return np.hstack([np.asarray(b.rights(t), dtype=complex).reshape(-1, b.size) for b in self.blocks])

    def _rights_dot(self, t):
        cols = []
        for b in self.blocks:
            if b.rights_dot is not None:
                cols.append(np.asarray(b.rights_dot(t), dtype=complex).reshape(-1, b.size))
            else:
                fn = lambda s, b=b: np.asarray(b.rights(s), dtype=complex).reshape(-1, b.size)
                cols.append(_fd5(fn, t, self.fd_step))
        return np.hstack(cols)

    def frame(self, t: float) -> Frame:
        R = self._rights(t)
        if R.shape[0] != R.shape[1]:
            raise DimensionMismatch(
                f"block sizes sum to {R.shape[1]} but vectors have length {R.shape[0]}"
            )
        eigs = [complex(b.eigenvalue(t)) for b in self.blocks]
        return make_frame(t, self.sizes, eigs, R, self._rights_dot(t))

    def superop(self, label: str = "L_J") -> Superop:
        """The generator ``S J S^-1`` this structure describes."""
        return Superop(sum(self.sizes), lambda t: self.frame(t).reconstruct(), label)

    @classmethod
    def from_frame_fn(cls, frame_at: Callable[[float], Frame], n: int) -> "JordanStructure":
        """All-1D structure from a closed-form frame function with n branches."""
        blocks = [
            JordanBlock(
                eigenvalue=lambda t, a=a: frame_at(t).eigenvalues[a],
                size=1,
                rights=lambda t, a=a: frame_at(t).rights[:, a : a + 1],
                rights_dot=lambda t, a=a: frame_at(t).rights_dot[:, a : a + 1],
            )
            for a in range(n)
        ]
        return cls(blocks)


def as_frame(obj, t) -> Frame:
    """Frame from a Frame, a SpectralPath (t = grid index) or a JordanStructure (t = time)."""
    if isinstance(obj, Frame):
        return obj
    if isinstance(obj, SpectralPath):
        if not isinstance(t, (int, np.integer)):
            raise TypeError("SpectralPath frames are addressed by integer grid index")
        return obj.frame(int(t))
    if isinstance(obj, JordanStructure):
        return obj.frame(float(t))
    raise TypeError(f"cannot build a frame from {type(obj).__name__}")


def check_quasi_eigen(L: Superop, js, t) -> dict:
    """Residuals of the right/left quasi-eigen relations at time ``t``.

    ``right = max || L D^n - D^{n-1} - lambda D^n ||`` and
    ``left = max || E^n L - E^{n+1} - lambda E^n ||`` with ``D^0 = E^{N+1} = 0``.
    For a SpectralPath, ``t`` is a grid index.
    """
    fr = as_frame(js, t)
    M = L(fr.t)
    D, E = fr.rights, fr.lefts
    lam = fr.diagonal_eigenvalues()
    right = left = 0.0
    for sl in fr.block_slices():
        for k in range(sl.start, sl.stop):
            r = M @ D[:, k] - lam[k] * D[:, k]
            if k > sl.start:
                r = r - D[:, k - 1]
            l = E[k] @ M - lam[k] * E[k]
            if k + 1 < sl.stop:
                l = l - E[k + 1]
            right = max(right, float(np.linalg.norm(r)))
            left = max(left, float(np.linalg.norm(l)))
    return {"t": fr.t, "right": right, "left": left, "max": max(right, left)}
