"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class FrontselError(Exception):
    exit_code = 1


class ConfigError(FrontselError, ValueError):
    exit_code = 2


class DomainError(FrontselError, ValueError):
    """Input outside the mathematical domain of an operation."""

    exit_code = 2


class NumericError(FrontselError, RuntimeError):
    exit_code = 3

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class ContractError(FrontselError, ValueError):
    exit_code = 4


class BracketError(ContractError):
    pass
