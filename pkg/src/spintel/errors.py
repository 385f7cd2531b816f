"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ContractViolation(RuntimeError):
    """A numeric precondition (normalization, probability sum, ...) is broken."""
