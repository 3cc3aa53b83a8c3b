"""Exception types shared across the package."""


class LcminError(Exception):
    """Base class for all package errors."""


class ModelError(LcminError):
    """Malformed network/model data (bad masks, dangling references, bounds)."""


class InfeasibleStateError(LcminError):
    """A port/load state that cannot exist, e.g. positive load on a dead arc."""


class ParseError(LcminError):
    """Malformed input text. Carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BuildError(LcminError):
    """A problem instance cannot be turned into a solvable model."""


class ExtractionError(LcminError):
    """Solver output violates integrality/normalization tolerances."""


class ReductionError(LcminError):
    """Invalid Set Cover input (empty family, uncovered item)."""


class EnumerationBudgetError(LcminError):
    """Brute-force oracle asked to enumerate more states than its budget."""
