"""
Error types for the VGT verifier.

Every failure the engines can signal is a subclass of VgtError so the CLI can
map it onto its exit-code contract in one place.
"""

from typing import List, Optional


class VgtError(Exception):
    """Base class for all verifier errors."""


class FieldMismatch(VgtError, TypeError):
    """Operands belong to different finite fields."""


class DivisionByZero(VgtError, ZeroDivisionError):
    """Division by the zero element of a finite field."""


class NotASquare(VgtError, ValueError):
    """Square root requested for a non-square."""


class BadDenominator(VgtError, ValueError):
    """The prime divides the denominator of a rational argument."""

    def __init__(self, value, p: int):
        self.value = value
        self.p = p
        super().__init__(f"{p} divides the denominator of {value}")


class BadParameter(VgtError, ValueError):
    """Surface parameter or sieve argument outside its domain."""


class BadPrime(VgtError):
    """The prime is a place of bad reduction for the parameter."""

    def __init__(self, p: int, factor: str):
        self.p = p
        self.factor = factor
        super().__init__(f"bad prime: {p} | {factor}")


class UndefinedAtZeroOrInfinity(VgtError, ValueError):
    """The discriminant formula has no value at t = 0 or t = infinity."""


class OracleBoundExceeded(VgtError):
    """The naive counting oracle was asked for a field above its bound."""

    def __init__(self, q: int, bound: int):
        self.q = q
        self.bound = bound
        super().__init__(f"naive oracle refuses q={q} (bound {bound})")


class TraceIntegrityError(VgtError):
    """An aggregation produced a non-integral or inconsistent trace."""


class CertificateRejected(VgtError):
    """Replaying a certificate did not reproduce its premises."""

    def __init__(self, message: str, failures: Optional[List[str]] = None):
        self.failures = failures or []
        detail = "; ".join(self.failures)
        super().__init__(f"{message}: {detail}" if detail else message)


class ConfigError(VgtError, ValueError):
    """Invalid run configuration."""
