"""Exception hierarchy shared by the engines and the command line."""


class CQECError(Exception):
    """Base class for all package errors."""


class SizeMismatchError(CQECError, ValueError):
    """Operands act on different numbers of qubits."""


class ResourceLimitError(CQECError):
    """A dense representation would exceed the configured qubit cap."""


class PauliParseError(CQECError, ValueError):
    """Malformed Pauli string.

    Attributes:
        position: 0-based character offset where parsing failed.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class CodeStructureError(CQECError, ValueError):
    """An operator or code definition is inconsistent with the stabilizer structure."""


class InvalidDensityMatrixError(CQECError, ValueError):
    pass


class IntegrationError(CQECError):
    """An invariant broke during time integration.

    Attributes:
        step: index of the offending integration step.
    """

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


class NumericalConsistencyError(CQECError):
    pass


class ConfigError(CQECError, ValueError):
    """Invalid scenario or code configuration; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
