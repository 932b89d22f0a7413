"""Exception taxonomy shared by the library and the CLI.

The CLI maps these onto stable exit codes (see cli.EXIT_CODES):
config/parameter problems -> 4, shape/size/sequence problems -> 3,
file-format and I/O problems -> 2.
"""


class FlowsrError(Exception):
    """Base class for all library errors."""


class ConfigurationError(FlowsrError):
    """Invalid configuration: bad key, bad value, incompatible weights."""


class ParameterError(FlowsrError):
    """A numeric argument is outside its legal range (e.g. t not in (0,1))."""


class ShapeError(FlowsrError):
    """Operands have incompatible spatial or channel dimensions."""


class SizeError(FlowsrError):
    """A frame is too small for the requested operation."""


class SequenceError(FlowsrError):
    """A frame sequence is empty, too short, or inconsistent."""


class FormatError(FlowsrError):
    """A binary file does not match its declared format."""


class OracleUnavailableError(FlowsrError):
    """Analytic-oracle estimation requested on frames without motion metadata."""
