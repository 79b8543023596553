"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so raise the most specific
class available.
"""


class EnsembleTraderError(Exception):
    """Base class for all package errors."""


class ConfigError(EnsembleTraderError):
    """Invalid or inconsistent run configuration."""


class DataError(EnsembleTraderError):
    """Bad market data: parse failures, invariant violations, coverage gaps."""


class ModelError(EnsembleTraderError):
    """Missing or corrupt model artifacts (snapshots, indexes)."""
