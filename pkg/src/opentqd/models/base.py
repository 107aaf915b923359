"""Container shared by the model modules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConfigError
from ..hs_algebra import OperatorBasis, Superop
from ..spectral import Frame


@dataclass
class Variants:
    """The drive variants of one experiment plus its reference states.

    ``frame`` is None for models without a closed-form eigensystem.
    """

    name: str
    basis: OperatorBasis
    rho0: np.ndarray
    tau: float
    L_adiabatic: Superop
    L_standard_tqd: Superop | None
    L_generalized: Superop | None
    target_state: np.ndarray
    adiabatic_solution: Callable[[float], np.ndarray]
    adiabatic_vector: Callable[[float], np.ndarray]
    frame: Callable[[float], Frame] | None = None
    omega_ref: float = 1.0

    def drive(self, name: str) -> Superop:
        table = {
            "adiabatic_me": self.L_adiabatic,
            "standard_tqd": self.L_standard_tqd,
            "generalized_tqd": self.L_generalized,
        }
        if name not in table:
            raise ConfigError(f"unknown drive {name!r}")
        if table[name] is None:
            raise ConfigError(f"drive {name!r} is not available for this model")
        return table[name]
