"""
Exception hierarchy shared by the engine modules and the command line.
"""

# Exit codes used by main.py
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_CONFIG = 3


class MacroError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(MacroError, ValueError):
    """Invalid input: parameters, config files, or data handed to a fit."""


class NumericalError(MacroError, RuntimeError):
    """A computation ran but its result cannot be trusted."""


class ValidationFailure(MacroError):
    """Engine and oracle disagree beyond tolerance."""


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the CLI exit code.

    Args:
        error: The exception that stopped the command

    Returns:
        Exit code (1 validation, 2 numerical, 3 config)
    """
    if isinstance(error, ValidationFailure):
        return EXIT_VALIDATION
    if isinstance(error, (ConfigError, ValueError, FileNotFoundError)):
        return EXIT_CONFIG
    return EXIT_NUMERICAL
