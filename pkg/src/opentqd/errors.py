"""Exception hierarchy shared by all modules."""


class OpenTQDError(Exception):
    """Base class for package errors."""


class DimensionMismatch(OpenTQDError, ValueError):
    pass


class InvalidStateError(OpenTQDError, ValueError):
    """A density matrix or coherence vector violates its invariants."""


class ExceptionalPointError(OpenTQDError):
    """The superoperator is (numerically) defective at some time.

    Raised when right eigenvectors coalesce, i.e. near an exceptional point.
    Use a caller-supplied :class:`~opentqd.spectral.JordanStructure` instead.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class GaugeAmbiguity(OpenTQDError):
    """Eigenvalue branches cannot be matched unambiguously between grid points."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class IntegrationError(OpenTQDError):
    """Time integration blew up or drifted off the trace-one manifold."""


class ContractViolation(OpenTQDError, ValueError):
    """Inputs break a documented algebraic contract (e.g. q @ q_inv != 1)."""


class ConfigError(OpenTQDError, ValueError):
    """Experiment configuration is malformed."""
