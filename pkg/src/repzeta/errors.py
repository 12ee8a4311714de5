"""Shared exception hierarchy.

Every error carries the name of the module that raised it and a stable
machine-readable code, so the CLI can surface ``module.code: message``
verbatim and map it to a stable exit status:

    1 -- usage / parameter errors
    2 -- domain errors (divergence region, pole proximity, search ceilings)
    3 -- capability errors (unsupported family, enumeration caps, modular case)
"""

from __future__ import annotations


class RepzetaError(Exception):
    exit_code = 2

    def __init__(self, module: str, code: str, message: str):
        self.module = module
        self.code = code
        super().__init__(message)

    @property
    def full_code(self) -> str:
        return f"{self.module}.{self.code}"

    def __str__(self) -> str:
        return f"{self.full_code}: {super().__str__()}"


class ParameterError(RepzetaError):
    """Invalid or missing argument; maps to a usage failure."""

    exit_code = 1


class EmptyRangeError(ParameterError):
    pass


class NotAUnitError(ParameterError):
    pass


class ShapeError(ParameterError):
    pass


class ValidationError(ParameterError):
    pass


class CeilingExceededError(RepzetaError):
    """Search ceiling hit; carries the ceiling that was exceeded."""

    exit_code = 2

    def __init__(self, module: str, code: str, message: str, ceiling: int):
        super().__init__(module, code, message)
        self.ceiling = ceiling


class ConvergenceDomainError(RepzetaError):
    exit_code = 2


class PoleError(RepzetaError):
    exit_code = 2


class InsufficientDataError(RepzetaError):
    exit_code = 2


class InternalConsistencyError(RepzetaError):
    exit_code = 2


class CapabilityError(RepzetaError):
    exit_code = 3


class CapExceededError(CapabilityError):
    pass


class UnsupportedSpecError(CapabilityError):
    pass


class ModularCaseError(CapabilityError):
    pass
