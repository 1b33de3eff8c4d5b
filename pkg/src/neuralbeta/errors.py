"""Exception hierarchy shared across the package."""


class NeuralBetaError(Exception):
    """Base class for all package errors."""


class ShapeError(NeuralBetaError):
    """Operand shapes are incompatible."""


class NonFiniteError(NeuralBetaError):
    """A computation produced NaN or infinity."""


class SingularSystemError(NeuralBetaError):
    """A linear system is singular or not positive-definite within tolerance."""


class ContractError(NeuralBetaError):
    """An operation was called in violation of its preconditions."""


class ConfigError(NeuralBetaError):
    """Invalid configuration value."""


class InsufficientHistoryError(NeuralBetaError):
    """A series is too short for the requested lookback."""
