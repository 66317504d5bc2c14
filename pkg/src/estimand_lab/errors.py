"""Exception types shared across the package."""


class EstimandLabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(EstimandLabError):
    """Invalid scenario configuration (bad value, unknown key, bad vector length)."""


class ParseError(EstimandLabError):
    """Estimand-language error with a source position.

    Attributes
    ----------
    line, column : int
        1-based position of the offending token in the source text.
    message : str
        Human readable description.
    expected : str
        Description of what the parser would have accepted here.
    """

    def __init__(self, line, column, message, expected=""):
        self.line = line
        self.column = column
        self.message = message
        self.expected = expected
        detail = f"{line}:{column}: {message}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class PlanError(EstimandLabError):
    """A parsed estimand cannot be turned into an executable analysis plan."""


class SingularDesignError(EstimandLabError):
    """Least-squares design matrix is rank deficient.

    ``column`` names the offending design column.
    """

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"singular design: column {column!r} is collinear")


class InestimableError(EstimandLabError):
    """An estimator cannot produce a value on the given records."""


class EstimandUndefinedError(EstimandLabError):
    """The requested oracle estimand does not exist on this population (e.g. empty stratum)."""


class MonotonicityViolationError(EstimandLabError):
    """Estimated stratum structure contradicts the monotone-tolerability assumption."""


class BootstrapInstabilityError(EstimandLabError):
    """Too many bootstrap resamples failed to produce an estimate."""

    def __init__(self, failure_rate, n_boot):
        self.failure_rate = failure_rate
        self.n_boot = n_boot
        super().__init__(
            f"estimator failed on {failure_rate:.1%} of {n_boot} bootstrap resamples (limit 10%)"
        )


class BalanceDiagnosticError(EstimandLabError):
    """Balance check impossible (e.g. an arm is empty within the analysis set)."""
