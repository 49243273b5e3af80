"""Exception hierarchy shared across the package."""


class EsdLabError(Exception):
    """Base class for all package errors."""


class DimensionError(EsdLabError, ValueError):
    """Matrix shapes or subsystem dimensions are inconsistent."""


class SizeLimitError(EsdLabError, ValueError):
    """A requested matrix would exceed the dense size limit."""


class NotHermitianError(EsdLabError, ValueError):
    """Input to a Hermitian-only routine is not Hermitian within tolerance."""


class PositivityError(EsdLabError, ValueError):
    """Matrix has an eigenvalue below the clamping threshold."""


class InvalidStateError(EsdLabError, ValueError):
    """A matrix fails the density-matrix invariants."""


class PatternError(EsdLabError, ValueError):
    """A state passed to the X-state formula carries off-pattern weight."""


class UnsupportedAnalyticFormError(EsdLabError, ValueError):
    """No closed form exists for the requested model/initial-state combination."""


class TruncationError(EsdLabError, RuntimeError):
    """Fock truncation failed to converge before the maximum cutoff.

    ``last_delta`` holds the last measured change of the reduced state.
    """

    def __init__(self, message, last_delta=float("nan"), cutoff=None):
        super().__init__(message)
        self.last_delta = last_delta
        self.cutoff = cutoff
