"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Malformed or invalid model/family configuration."""


class PreconditionError(ValueError):
    """An operation was called outside its documented domain."""


class NotLatticeFinite(Exception):
    """The chain state space is not a finite lattice; use the splitting
    estimator instead of the spectral route."""


class DegenerateExtinction(RuntimeError):
    """Every splitting repetition died almost immediately; the population
    or horizon is too small for this configuration."""


class NoSignChange(ValueError):
    """Threshold search requires opposite verdicts at the range endpoints."""


class InternalConsistencyError(RuntimeError):
    """Two routes that must agree on a verdict disagreed beyond tolerance."""


class NonConvergence(RuntimeError):
    """An iterative computation failed to localize its answer."""
