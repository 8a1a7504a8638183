"""Exception types shared across the package."""


class ContractForgeError(Exception):
    """Base class for all package-specific errors."""


class DomainError(ContractForgeError, ValueError):
    """An input is outside the mathematical domain of an operation."""


class EnumerationCapError(ContractForgeError):
    """The realization count exceeds the configured enumeration cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(
            f"enumeration would produce {count} realizations, above the cap of {cap}"
        )


class SolverError(ContractForgeError):
    """A numerical solve failed to converge; carries the residual report."""

    def __init__(self, message: str, residuals=None):
        self.residuals = residuals
        super().__init__(message)


class InfeasibleSurplusError(ContractForgeError):
    """The binding participation system has no root inside its bracket."""


class ContractViolationError(ContractForgeError):
    """A menu breaks a hard contract requirement (e.g. reward above budget)."""


class ConfigError(ContractForgeError):
    """A configuration document is malformed or fails validation."""
