"""Exception types raised by eit5."""


class EIT5Error(Exception):
    """Base class for all eit5 errors."""


class ConfigError(EIT5Error, ValueError):
    """Invalid sweep configuration or parameter set."""


class DegenerateSystemError(EIT5Error, ArithmeticError):
    """A steady-state linear system is singular (lossless configuration on a pole)."""


class IntegrationError(EIT5Error, RuntimeError):
    """Time integration became unstable or failed to converge."""
