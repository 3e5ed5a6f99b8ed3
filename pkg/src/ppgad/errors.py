"""Exception taxonomy shared by all modules.

The CLI maps these onto distinct exit codes (see cli.py), so library code
should raise the most specific class that applies.
"""


class PpgadError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(PpgadError):
    """Invalid configuration: bad band edges, impossible shapes, bad flags."""


class IngestionError(PpgadError):
    """Dataset loading failed: missing file, count mismatch, non-finite data."""


class DegenerateSignalError(PpgadError):
    """An input signal has no usable variation (e.g. constant vector)."""


class FitError(PpgadError):
    """A detector could not be fitted on the given training data."""


class EvaluationError(PpgadError):
    """An evaluation protocol could not be carried out on the given data."""


class ContractViolation(PpgadError):
    """Caller broke an interface contract, e.g. a shape or dimension mismatch."""
