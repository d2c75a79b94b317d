"""Exception types mapped to CLI exit codes."""


class ConfigurationError(Exception):
    """Bad config, unknown attack label, missing enhancer set (exit code 2)."""


class DataError(Exception):
    """Unusable dataset or image files (exit code 3)."""


class TrainingAborted(Exception):
    """Numeric failure (NaN loss) during training (exit code 4)."""
