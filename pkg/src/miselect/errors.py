"""Exception hierarchy shared by every module.

Each class carries the process exit code the CLI maps it to, so error
classification happens exactly once, at the raise site.
"""


class ToolkitError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(ToolkitError, ValueError):
    """Invalid parameters, flags, or flag combinations (exit code 2)."""

    exit_code = 2


class DataError(ToolkitError, ValueError):
    """Defective or degenerate input data (exit code 3)."""

    exit_code = 3


class SolverError(ToolkitError, RuntimeError):
    """Solver non-convergence in fail mode (exit code 4)."""

    exit_code = 4
