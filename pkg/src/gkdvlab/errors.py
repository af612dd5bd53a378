"""Exception hierarchy shared across the laboratory modules."""


class GKdVLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GKdVLabError):
    """A quantity left the admissible spatial or parameter domain."""


class OverlapError(GKdVLabError):
    """Soliton centers unordered or closer than the configured minimum."""


class BlowupError(GKdVLabError):
    """Solution amplitude exceeded the magnitude cap or became non-finite.

    ``partial`` carries the trajectory accumulated before the failure when
    the error escapes ``evolve``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class WrongExponentError(GKdVLabError):
    """Operation defined only for a specific nonlinearity power."""


class KappaRangeError(GKdVLabError):
    """Localization parameter outside its admissible interval."""


class NonPositiveValueError(GKdVLabError):
    """Log-linear fitting requires strictly positive samples."""


class SpectralTailError(GKdVLabError):
    """High-wavenumber spectral content too large for a trustworthy derivative."""


class NoConvergenceError(GKdVLabError):
    """Newton iteration exhausted its budget without meeting tolerance."""


class SeparationError(GKdVLabError):
    """Modulation inputs unordered, too close, or speeds nearly degenerate."""


class ClosenessError(GKdVLabError):
    """Field too far from the profile sum for the decomposition to apply."""


class SpeedRangeError(GKdVLabError):
    """Soliton speed non-positive."""


class DecayError(GKdVLabError):
    """Potential does not decay at the domain edges."""


class UnresolvedSpectrumError(GKdVLabError):
    """Eigenvalues moved more than tolerance under grid refinement."""


class FormatError(GKdVLabError):
    """Snapshot file corrupt, truncated, or of an unknown version."""


class ConfigError(GKdVLabError):
    """Experiment configuration failed validation."""
