"""Exception hierarchy shared by the oracles, constructors and the CLI."""


class KroneckerError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(KroneckerError, ValueError):
    pass


class FieldMismatch(KroneckerError, ValueError):
    pass


class FlagNotNested(KroneckerError, ValueError):
    pass


class BudgetExceeded(KroneckerError):
    def __init__(self, requested, budget, what="subspaces"):
        self.requested = requested
        self.budget = budget
        super().__init__(f"enumeration of {requested} {what} exceeds budget {budget}")


class InvalidMultiWeight(KroneckerError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        first = self.violations[0] if self.violations else "unknown violation"
        super().__init__(f"invalid multiweight: {first}")


class InvalidTwist(KroneckerError, ValueError):
    pass


class InfeasibleConstruction(KroneckerError, ValueError):
    def __init__(self, constraint, detail):
        self.constraint = constraint
        self.detail = detail
        super().__init__(f"{constraint}: {detail}")


class SearchExhausted(KroneckerError):
    def __init__(self, what, attempts):
        self.attempts = attempts
        super().__init__(f"{what}: no valid candidate after {attempts} attempts")


class SingularElement(KroneckerError, ValueError):
    pass


class MalformedInput(KroneckerError, ValueError):
    """Input JSON that does not parse or does not match its schema."""
