"""
Exception hierarchy shared by the services and the command layer.

Every error carries the process exit status the CLI reports for it.
"""


class ScalimError(Exception):
    """
    Base error. `exit_code` is what `main.py` returns when this escapes a command.
    """
    exit_code: int = 3

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# --- CONFIGURATION (exit 2) ---

class ConfigError(ScalimError):
    exit_code = 2


class UnknownFunctionError(ConfigError):
    pass


class UnknownClaimError(ConfigError):
    pass


class DomainError(ScalimError, ValueError):
    """
    A precondition of an operation was violated by its inputs.
    """
    exit_code = 2


class SingularityError(DomainError):
    pass


# --- NUMERICS (exit 3) ---

class NumericalError(ScalimError):
    exit_code = 3


class NaNIntegrandError(NumericalError):
    pass


class NonLipschitzInputError(NumericalError):
    pass


class NoiseDominatedError(NumericalError):
    pass


# --- CERTIFICATES (exit 1) ---

class CertificateFailure(ScalimError):
    exit_code = 1
