"""Exception types shared across the package.

The CLI maps these onto its exit codes: DomainError -> 2, IntegrityError -> 3.
"""


class DomainError(ValueError):
    """An argument is outside an operation's stated domain."""


class IntegrityError(RuntimeError):
    """A persisted artifact (checkpoint, hit stream) fails validation."""


class DegenerateDataError(DomainError):
    """Input data admits no meaningful fit or histogram (e.g. all values equal)."""
