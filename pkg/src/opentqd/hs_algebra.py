"""Hilbert-Schmidt vectorization of operators and Lindblad generators.

Density operators are expanded in an orthogonal operator basis
``{sigma_0 = 1, sigma_n}`` with ``Tr(sigma_n sigma_m^dag) = D delta_nm``.
The coherence vector of ``rho`` has components ``Tr(rho sigma_n^dag)`` and a
generator ``L_t[.]`` becomes the D^2 x D^2 matrix

    Lmat[k, i] = (1/D) Tr(sigma_k^dag L_t[sigma_i]).

Coherence vectors are plain complex numpy arrays; for a Hermitian basis they
are real up to round-off, which is checked rather than assumed.

Inner product convention: ``hs_inner`` returns ``(1/D) Tr(xi_1^dag xi_2)``
for the operators ``xi = (1/D) sum_n v_n sigma_n`` built from the vectors,
which equals ``(1/D^2) sum_n conj(a_n) b_n``.  Left/right eigenvector pairs
of a superoperator are instead normalised by the plain row-times-column
product (``left @ right = 1``); that pairing is what the spectral and TQD
modules rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidStateError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

PAULI = {"i": IDENTITY_2, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass(frozen=True)
class OperatorBasis:
    """Ordered operator basis ``elements[0] = 1`` plus D^2 - 1 traceless matrices."""

    dim: int
    elements: np.ndarray  # (D^2, D, D)
    name: str = "custom"

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=complex)
        D = self.dim
        if els.shape != (D * D, D, D):
            raise DimensionMismatch(
                f"basis for D={D} needs shape {(D * D, D, D)}, got {els.shape}"
            )
        object.__setattr__(self, "elements", els)
        if not np.allclose(els[0], np.eye(D), atol=1e-12):
            raise ValueError("elements[0] must be the identity")
        traces = np.einsum("nii->n", els[1:])
        if np.max(np.abs(traces), initial=0.0) > 1e-12:
            raise ValueError("basis elements beyond index 0 must be traceless")
        gram = np.einsum("nij,mij->nm", els, els.conj())
        if not np.allclose(gram, D * np.eye(D * D), atol=1e-12):
            raise ValueError("basis is not orthogonal with Tr(s_n s_m^dag) = D delta_nm")

    @property
    def size(self) -> int:
        return self.dim * self.dim

    @property
    def is_hermitian(self) -> bool:
        return bool(np.allclose(self.elements, self.elements.conj().transpose(0, 2, 1)))

    @property
    def columns(self) -> np.ndarray:
        """Matrix whose columns are the row-major vectorized basis elements."""
        return self.elements.reshape(self.size, -1).T


def pauli_basis() -> OperatorBasis:
    """The Hermitian qubit basis ``(1, sigma_x, sigma_y, sigma_z)``."""
    return OperatorBasis(2, np.stack([IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z]), name="pauli")


def gell_mann_basis(dim: int) -> OperatorBasis:
    """Generalized Gell-Mann basis scaled so that ``Tr(s_n s_m^dag) = D delta_nm``.

    Ordering: identity, symmetric off-diagonals, antisymmetric off-diagonals,
    then diagonal generators.  For ``dim == 2`` this is exactly the Pauli basis.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    D = dim
    sym, asym, diag = [], [], []
    for j in range(D):
        for k in range(j + 1, D):
            s = np.zeros((D, D), dtype=complex)
            s[j, k] = s[k, j] = 1.0
            sym.append(s)
            a = np.zeros((D, D), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            asym.append(a)
    for l in range(1, D):
        d = np.zeros((D, D), dtype=complex)
        d[np.arange(l), np.arange(l)] = 1.0
        d[l, l] = -l
        d *= np.sqrt(2.0 / (l * (l + 1)))
        diag.append(d)
    # standard Gell-Mann normalisation is Tr = 2 delta
    scale = np.sqrt(D / 2.0)
    els = [np.eye(D, dtype=complex)] + [scale * m for m in sym + asym + diag]
    name = "pauli" if D == 2 else f"gell-mann-{D}"
    return OperatorBasis(D, np.stack(els), name=name)


def basis_for_dim(dim: int) -> OperatorBasis:
    return pauli_basis() if dim == 2 else gell_mann_basis(dim)


def _check_square(m: np.ndarray, dim: int, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (dim, dim):
        raise DimensionMismatch(f"{what} has shape {m.shape}, expected {(dim, dim)}")
    return m


def vectorize(rho, basis: OperatorBasis) -> np.ndarray:
    """Coherence vector with components ``Tr(rho sigma_n^dag)``."""
    rho = _check_square(rho, basis.dim, "operator")
    return np.einsum("ij,nij->n", rho, basis.elements.conj())


def to_operator(v, basis: OperatorBasis) -> np.ndarray:
    """Operator ``(1/D) sum_n v_n sigma_n`` without any trace or Hermiticity check."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (basis.size,):
        raise DimensionMismatch(f"vector has length {v.shape}, expected {basis.size}")
    return np.einsum("n,nij->ij", v, basis.elements) / basis.dim


def devectorize(v, basis: OperatorBasis, *, trace_tol: float = 1e-8) -> np.ndarray:
    """Density matrix from a coherence vector.

    The trace component must equal one within ``trace_tol``; a larger deviation
    usually means an integrator drifted.  The result is Hermitized.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (basis.size,):
        raise DimensionMismatch(f"vector has length {v.shape}, expected {basis.size}")
    if abs(v[0] - 1.0) > trace_tol:
        raise InvalidStateError(
            f"trace component is {v[0]!r}, deviates from 1 by more than {trace_tol:g}"
        )
    v = v.copy()
    v[0] = 1.0
    rho = to_operator(v, basis)
    return 0.5 * (rho + rho.conj().T)


def hs_inner(a, b, basis: OperatorBasis) -> complex:
    """``(1/D) Tr(xi_a^dag xi_b)`` evaluated from coherence components."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (basis.size,) or b.shape != (basis.size,):
        raise DimensionMismatch("vectors do not match the basis size")
    return complex(np.vdot(a, b) / basis.dim**2)


def check_density_matrix(rho, *, herm_tol=1e-10, trace_tol=1e-10, pos_tol=1e-8) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise InvalidStateError(f"density matrix has trace {np.trace(rho)!r}")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -pos_tol:
        raise InvalidStateError(f"density matrix has eigenvalue {lo:.3e} < -{pos_tol:g}")
    return rho


@dataclass(frozen=True)
class Superop:
    """A D^2 x D^2 matrix-valued function of time.

    ``matrix_at`` must be deterministic; calling the object evaluates it.
    """

    dim_sq: int
    matrix_at: Callable[[float], np.ndarray]
    label: str = ""

    def __call__(self, t: float) -> np.ndarray:
        m = np.asarray(self.matrix_at(float(t)), dtype=complex)
        if m.shape != (self.dim_sq, self.dim_sq):
            raise DimensionMismatch(
                f"{self.label or 'superop'} returned shape {m.shape}, expected {self.dim_sq}^2"
            )
        return m

    def __add__(self, other: "Superop") -> "Superop":
        if not isinstance(other, Superop):
            return NotImplemented
        if other.dim_sq != self.dim_sq:
            raise DimensionMismatch("cannot add superoperators of different size")
        a, b = self.matrix_at, other.matrix_at
        return Superop(self.dim_sq, lambda t: a(t) + b(t), f"{self.label}+{other.label}")

    @classmethod
    def constant(cls, matrix, label: str = "") -> "Superop":
        m = np.array(matrix, dtype=complex)
        m.setflags(write=False)
        return cls(m.shape[0], lambda t: m, label)

    @classmethod
    def from_samples(cls, times, matrices, label: str = "") -> "Superop":
        """Piecewise-linear interpolation of sampled matrices (exact at the samples)."""
        times = np.asarray(times, dtype=float)
        mats = np.asarray(matrices, dtype=complex)
        if mats.shape[0] != times.size:
            raise DimensionMismatch("need one matrix per sample time")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")

        def matrix_at(t):
            j = int(np.searchsorted(times, t, side="right")) - 1
            j = min(max(j, 0), times.size - 2)
            w = (t - times[j]) / (times[j + 1] - times[j])
            if w == 0.0:
                return mats[j]
            if w == 1.0:
                return mats[j + 1]
            return (1.0 - w) * mats[j] + w * mats[j + 1]

        return cls(mats.shape[1], matrix_at, label)


def _const_rate(value: float) -> Callable[[float], float]:
    return lambda t: value


@dataclass
class LindbladSpec:
    """Time-dependent GKSL generator.

    ``channels`` holds ``(jump_operator, rate_at)`` pairs; ``rate_at`` may be a
    float for a constant rate.  hbar = 1, so H is in frequency units.
    """

    hamiltonian_at: Callable[[float], np.ndarray]
    channels: Sequence[tuple] = field(default_factory=list)
    dim: int | None = None

    def __post_init__(self):
        chans = []
        for op, rate in self.channels:
            op = np.asarray(op, dtype=complex)
            if not callable(rate):
                rate = _const_rate(float(rate))
            chans.append((op, rate))
        self.channels = chans
        if self.dim is None:
            self.dim = np.asarray(self.hamiltonian_at(0.0)).shape[0]

    def hamiltonian(self, t: float) -> np.ndarray:
        H = _check_square(self.hamiltonian_at(t), self.dim, "hamiltonian")
        if np.max(np.abs(H - H.conj().T)) > 1e-12 * max(1.0, np.abs(H).max()):
            raise ValueError(f"hamiltonian is not Hermitian at t={t}")
        return H

    def rates(self, t: float) -> list[float]:
        out = []
        for _, rate in self.channels:
            g = float(rate(t))
            if g < 0:
                raise ValueError(f"negative decay rate {g} at t={t}")
            out.append(g)
        return out

    def apply(self, t: float, X) -> np.ndarray:
        """``L_t[X] = -i[H, X] + sum_k g_k (L X L^dag - 1/2 {L^dag L, X})``."""
        X = _check_square(X, self.dim, "operator")
        H = self.hamiltonian(t)
        out = -1j * (H @ X - X @ H)
        for (L, _), g in zip(self.channels, self.rates(t)):
            LdL = L.conj().T @ L
            out += g * (L @ X @ L.conj().T - 0.5 * (LdL @ X + X @ LdL))
        return out


def liouvillian_rowmajor(spec: LindbladSpec, t: float) -> np.ndarray:
    """Generator acting on row-major ``vec(rho)`` (``vec(A X B) = (A kron B^T) vec X``)."""
    D = spec.dim
    I = np.eye(D)
    H = spec.hamiltonian(t)
    S = -1j * (np.kron(H, I) - np.kron(I, H.T))
    for (L, _), g in zip(spec.channels, spec.rates(t)):
        if g == 0.0:
            continue
        LdL = L.conj().T @ L
        S += g * (np.kron(L, L.conj()) - 0.5 * (np.kron(LdL, I) + np.kron(I, LdL.T)))
    return S


def build_superop(spec: LindbladSpec, basis: OperatorBasis, label: str = "L") -> Superop:
    """Matrix of the generator in the coherence-vector frame of ``basis``."""
    if spec.dim != basis.dim:
        raise DimensionMismatch(f"generator has D={spec.dim}, basis has D={basis.dim}")
    B = basis.columns
    Bh = B.conj().T
    D = basis.dim

    def matrix_at(t):
        return Bh @ liouvillian_rowmajor(spec, t) @ B / D

    return Superop(basis.size, matrix_at, label)


def hamiltonian_superop(H, basis: OperatorBasis) -> np.ndarray:
    """Coherence-frame matrix of ``-i[H, .]`` for a fixed Hamiltonian."""
    H = np.asarray(H, dtype=complex)
    spec = LindbladSpec(lambda t: H, [], dim=H.shape[0])
    return build_superop(spec, basis)(0.0)
