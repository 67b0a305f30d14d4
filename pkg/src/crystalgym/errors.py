"""Exception hierarchy shared across the package."""


class CrystalGymError(Exception):
    """Base class for all package errors."""


class ParseError(CrystalGymError):
    """Malformed input file; carries line/field context where available."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(CrystalGymError):
    """Structurally readable input violating a domain invariant."""


class DomainError(CrystalGymError):
    """Argument outside the mathematical domain of an operation."""


class FitError(CrystalGymError):
    """Equation-of-state fit failed or produced non-physical parameters."""


class StoreError(CrystalGymError):
    """Result cache backing file is unreadable."""


class ConfigError(CrystalGymError):
    """Invalid episode or experiment configuration."""


class ActionError(CrystalGymError):
    """Action index outside the configured action space."""


class ActionSpaceError(CrystalGymError):
    """State contains an element not present in the action space."""


class EpisodeDoneError(CrystalGymError):
    """step() called on a finished episode."""


class ShapeError(CrystalGymError):
    """Tensor or parameter shapes do not match."""


class GraphError(CrystalGymError):
    """backward() called without a recorded forward graph."""


class CheckpointMismatchError(CrystalGymError):
    """Checkpoint was saved with a different network configuration."""
