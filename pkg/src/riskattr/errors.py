"""Exception hierarchy shared by every module in the package."""


class RiskAttrError(Exception):
    """Base class for all package errors."""


class ContractViolation(RiskAttrError, ValueError):
    """An argument broke a documented precondition."""


class InsufficientDataError(RiskAttrError, ValueError):
    """Too few records, points or strikes to carry out the computation."""


class InsufficientChainError(InsufficientDataError):
    """An option chain has fewer than the required strikes on one side of the forward."""


class SizeLimitError(RiskAttrError, ValueError):
    """Exact enumeration requested for more features than supported."""


class CapabilityError(RiskAttrError, TypeError):
    """A model lacks a capability (e.g. a gradient) that the caller requires."""


class DivergenceError(RiskAttrError, ArithmeticError):
    """Training produced a non-finite objective."""

    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class ModelEvaluationError(RiskAttrError, RuntimeError):
    """The wrapped model raised or returned a non-finite value at ``point``."""

    def __init__(self, message, point):
        super().__init__(f"{message} at {point!r}")
        self.point = point


class ParseError(RiskAttrError, ValueError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(RiskAttrError, ValueError):
    """Parsed records broke domain invariants; ``rows`` lists offending line numbers."""

    def __init__(self, message, rows):
        super().__init__(f"{message}: rows {rows}")
        self.rows = list(rows)
