"""Exception hierarchy shared across the triage package.

The CLI maps these onto process exit codes: usage problems exit 1,
DataError exits 2, ConvergenceError exits 3.
"""


class TriageError(Exception):
    """Base class for all errors raised by this package."""


class DataError(TriageError):
    """Malformed input data, schema violations, or inconsistent files."""


class ConvergenceError(TriageError):
    """A numeric routine failed to converge within its iteration budget."""
