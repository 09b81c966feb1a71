"""Exception types shared across the package."""


class SplitPipeError(Exception):
    """Base class for all package-specific errors."""


class ScenarioFormatError(SplitPipeError):
    """A scenario document could not be parsed (bad syntax, bad unit string)."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class ScenarioValidationError(SplitPipeError):
    """A parsed scenario violates an invariant.  ``field`` names the offender."""

    def __init__(self, field: str, message: str = "invalid value"):
        self.field = field
        super().__init__(f"{field}: {message}")


class InfeasibleDecisionError(SplitPipeError):
    """A decision cannot be evaluated against a scenario (e.g. zero slot
    with a positive batch share)."""


class InfeasibleProblemError(SplitPipeError):
    """An optimization subproblem has an empty feasible set.

    ``diagnostics`` carries structured detail (per cut layer or per
    constraint) for error reporting.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class UnboundedProblemError(SplitPipeError):
    """A linear program is unbounded below (never expected from well-formed
    inputs; kept for solver completeness)."""
