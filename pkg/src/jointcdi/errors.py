"""Exception types shared across the package."""


class JointCDIError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(JointCDIError, ValueError):
    """Input collapses to zero (zero channel, codeword in a null space, ...)."""


class NumericalInputError(JointCDIError, ValueError):
    """A matrix violates a numerical precondition (not PSD, not Hermitian)."""


class SingularPrecoderError(JointCDIError, ArithmeticError):
    """The stacked quantized CDI matrix is rank deficient."""


class ConfigError(JointCDIError, ValueError):
    """Invalid or unreadable configuration."""
