"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`HCVQError`
so callers (the CLI in particular) can separate them from programming errors.
"""


class HCVQError(Exception):
    """Base class for all package errors."""


class NonFiniteInput(HCVQError, ValueError):
    pass


class DegenerateEdge(HCVQError, ValueError):
    pass


class UnsupportedDimension(HCVQError, ValueError):
    pass


class NonPositiveWidth(HCVQError, ValueError):
    pass


class InsufficientPoints(HCVQError, ValueError):
    pass


class EmptyDiagram(HCVQError, ValueError):
    pass


class DimensionMismatch(HCVQError, ValueError):
    pass


class EmptyBatch(HCVQError, ValueError):
    pass


class DegenerateInput(HCVQError, ValueError):
    pass


class NonFiniteEntropy(HCVQError, ValueError):
    pass


class ZeroInputEntropy(HCVQError, ValueError):
    pass


class DivergedTraining(HCVQError, RuntimeError):
    """Reconstruction loss became NaN; ``step`` names where it happened."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"training diverged at step {step} (recon_loss is NaN)")


class BadMagic(HCVQError, ValueError):
    pass


class TruncatedFile(HCVQError, ValueError):
    pass


class DimensionOverflow(HCVQError, ValueError):
    pass


class UnknownKind(HCVQError, ValueError):
    pass


class TooLarge(HCVQError, ValueError):
    pass


class ConfigError(HCVQError, ValueError):
    """Unknown key, unparsable value or malformed config line."""
