"""Exception taxonomy shared by all greedyopt modules."""


class GreedyOptError(Exception):
    """Base class for every error raised by this package."""


class EmptyStream(GreedyOptError):
    """A gradient stream with zero samples was supplied."""


class DimensionMismatch(GreedyOptError):
    """Operands have incompatible shapes."""


class NonFinite(GreedyOptError):
    """An input or intermediate value contains NaN or Inf."""


class InsufficientSamples(GreedyOptError):
    """Too few samples for the requested lag depth."""


class InvalidBudget(GreedyOptError):
    """A trust-region budget parameter is non-positive or malformed."""


class NonPSDInput(GreedyOptError):
    """A matrix required to be positive semidefinite is not."""


class NonPositiveCost(GreedyOptError):
    """A per-coordinate cost vector has an entry <= 0."""


class ZeroMatrix(GreedyOptError):
    """A matrix required to be nonzero is identically zero."""


class NonConvergence(GreedyOptError):
    """An iterative routine hit its iteration cap above tolerance."""


class InconsistentTarget(GreedyOptError):
    """A target vector lies outside the reachable range."""


class Divergence(GreedyOptError):
    """A training run blew up past the divergence guard."""


class ConfigError(GreedyOptError):
    """A run configuration is malformed or self-contradictory."""
