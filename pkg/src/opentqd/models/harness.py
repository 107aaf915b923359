"""Synthetic generator with a genuine 2x2 Jordan block.

``L(t) = S(t) (J_2[l1(t)] (+) l3(t) (+) l4(t)) S(t)^-1`` with
``S(t) = expm(t A) S0``, so ``dS/dt = A S`` is known exactly.  The columns
of ``S`` are the right quasi-eigenvectors and the rows of ``S^-1`` the lefts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from ..hs_algebra import Superop
from ..spectral import JordanBlock, JordanStructure


def _default_eigs():
    return (
        (lambda t: -0.5 + 0.2 * np.sin(t)),
        (lambda t: -1.0 - 0.1 * t),
        (lambda t: -1.7 + 0.3 * np.cos(t)),
    )


@dataclass
class JordanHarness:
    A: np.ndarray
    S0: np.ndarray
    eigs: tuple = field(default_factory=_default_eigs)

    def S(self, t: float) -> np.ndarray:
        return expm(t * self.A) @ self.S0

    def S_dot(self, t: float) -> np.ndarray:
        return self.A @ self.S(t)

    def structure(self) -> JordanStructure:
        l1, l3, l4 = self.eigs
        return JordanStructure(
            [
                JordanBlock(l1, 2, lambda t: self.S(t)[:, 0:2], lambda t: self.S_dot(t)[:, 0:2]),
                JordanBlock(l3, 1, lambda t: self.S(t)[:, 2:3], lambda t: self.S_dot(t)[:, 2:3]),
                JordanBlock(l4, 1, lambda t: self.S(t)[:, 3:4], lambda t: self.S_dot(t)[:, 3:4]),
            ]
        )

    def jordan_matrix(self, t: float) -> np.ndarray:
        l1, l3, l4 = self.eigs
        J = np.diag([l1(t), l1(t), l3(t), l4(t)]).astype(complex)
        J[0, 1] = 1.0
        return J

    def superop(self) -> Superop:
        def matrix_at(t):
            S = self.S(t)
            return S @ self.jordan_matrix(t) @ np.linalg.inv(S)

        return Superop(4, matrix_at, "L_harness")


def default_harness(seed: int = 7, *, scale: float = 0.4) -> JordanHarness:
    rng = np.random.default_rng(seed)
    A = scale * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / 2
    S0 = np.eye(4) + 0.3 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    return JordanHarness(A=A, S0=S0)
