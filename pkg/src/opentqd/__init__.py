"""Open-system transitionless quantum driving toolkit.

Builds Lindbladian superoperators in a Hilbert-Schmidt coherence-vector
frame, analyses their (quasi-)eigenstructure along a time grid, synthesizes
standard and generalized counter-diabatic generators, and integrates the
resulting master equations.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ContractViolation,
    DimensionMismatch,
    ExceptionalPointError,
    GaugeAmbiguity,
    IntegrationError,
    InvalidStateError,
    OpenTQDError,
)
from .hs_algebra import (
    LindbladSpec,
    OperatorBasis,
    Superop,
    build_superop,
    devectorize,
    gell_mann_basis,
    hs_inner,
    pauli_basis,
    vectorize,
)
from .spectral import (
    Frame,
    JordanStructure,
    SpectralPath,
    TimeGrid,
    check_quasi_eigen,
    differentiate_path,
    eigensystem_path,
    gauge_smooth,
    overlap_matrix,
)
from .dynamics import Trajectory, bloch_vector, fidelity, integrate, purity

__all__ = [
    "__version__",
    "ConfigError",
    "ContractViolation",
    "DimensionMismatch",
    "ExceptionalPointError",
    "GaugeAmbiguity",
    "IntegrationError",
    "InvalidStateError",
    "OpenTQDError",
    "LindbladSpec",
    "OperatorBasis",
    "Superop",
    "build_superop",
    "devectorize",
    "gell_mann_basis",
    "hs_inner",
    "pauli_basis",
    "vectorize",
    "Frame",
    "JordanStructure",
    "SpectralPath",
    "TimeGrid",
    "check_quasi_eigen",
    "differentiate_path",
    "eigensystem_path",
    "gauge_smooth",
    "overlap_matrix",
    "Trajectory",
    "bloch_vector",
    "fidelity",
    "integrate",
    "purity",
]
