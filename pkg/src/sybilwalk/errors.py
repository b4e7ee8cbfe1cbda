"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SybilWalkError(Exception):
    exit_code = 4


class InputError(SybilWalkError, ValueError):
    """Bad input file, record, config value or model file."""

    exit_code = 2


class MalformedRecordError(InputError):
    pass


class MalformedDataError(InputError):
    pass


class EmptyDatasetError(InputError):
    pass


class MalformedEdgeError(InputError):
    pass


class ModelFormatError(InputError):
    pass


class ConfigError(InputError):
    pass


class MalformedPriorError(InputError):
    pass


class CoverageError(InputError):
    pass


class NoDataError(InputError):
    pass


class DegenerateLabelsError(SybilWalkError, ValueError):
    """Only one class present where both are required."""

    exit_code = 3


class InvariantViolation(SybilWalkError, RuntimeError):
    exit_code = 4


class IsolatedNodeError(InvariantViolation):
    pass


class UnreachableNodeError(SybilWalkError, ValueError):
    """A user node has no path to either label node."""

    exit_code = 3


class NonabsorbingWalkError(InvariantViolation):
    pass
