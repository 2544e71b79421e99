"""Exception types shared across the package."""


class GaptolError(Exception):
    """Base class for package-specific errors."""


class DomainError(GaptolError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class BudgetError(GaptolError):
    """An exact-enumeration guard was exceeded; use the Monte-Carlo path."""


class InvariantError(GaptolError):
    """A validated object invariant does not hold (e.g. non-unit dual norm)."""


class SeparabilityError(GaptolError):
    """Training data is not linearly separable.

    ``witness``, when available, is ``(point, pos_coeffs, neg_coeffs)``: a
    point common to both class hulls together with the convex coefficients
    expressing it in each class.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MarginInfeasibleError(GaptolError):
    """Rejection sampling cannot realize the requested margin."""

    def __init__(self, delta, acceptance_rate, probes):
        super().__init__(
            f"margin {delta} is infeasible for this generator: acceptance "
            f"rate {acceptance_rate:.3g} over {probes} probe draws"
        )
        self.delta = delta
        self.acceptance_rate = acceptance_rate
        self.probes = probes


class DegreeError(DomainError):
    """A graph vertex has zero (weighted) degree."""


class NumericalError(GaptolError):
    """An iterative routine failed to converge; the message reports the residual."""


class ConfigError(GaptolError):
    """An experiment config was rejected; the message carries a JSON pointer."""
