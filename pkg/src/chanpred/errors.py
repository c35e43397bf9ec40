"""Exception types shared across the package."""

from __future__ import annotations


class SingularMatrixError(ValueError):
    """A factorization hit a non-positive (or zero) pivot.

    ``pivot`` is the 1-based index of the offending leading minor when the
    failure came from a Cholesky factorization, or ``None`` when it came
    from a determinant that underflowed to zero.
    """

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class IllPosedDecompositionError(ValueError):
    """The spectral-weight fit has a singular Gram system."""


class ConfigError(ValueError):
    """A config file or config override could not be parsed.

    Carries the offending ``key`` and 1-based ``line`` when known.
    """

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        super().__init__(message)
        self.key = key
        self.line = line


class TrainingError(RuntimeError):
    """Training produced a non-finite value.

    ``step`` is the 0-based minibatch index that failed; ``last_weights``
    holds the most recent finite parameter state.
    """

    def __init__(self, message: str, step: int, last_weights=None):
        super().__init__(message)
        self.step = step
        self.last_weights = last_weights
