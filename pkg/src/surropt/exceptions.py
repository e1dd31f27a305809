"""Exception types shared across the toolkit."""


class SurroptError(Exception):
    """Base class for all toolkit errors."""


class FeasibilityError(SurroptError, ValueError):
    """A point lies outside the feasible box."""


class CapabilityError(SurroptError, TypeError):
    """A model or surrogate lacks a required capability (e.g. gradients)."""


class RankDeficiencyError(SurroptError, ValueError):
    """A design matrix is rank deficient for the requested solver."""


class FactorizationError(SurroptError, ValueError):
    """A matrix could not be factorized, even after jitter escalation."""


class StabilityError(SurroptError, ValueError):
    """A numerically unstable state: an unstable queue configuration or a
    posterior variance far below zero."""


class BudgetError(SurroptError, ValueError):
    """The simulation budget is too small for the requested operation."""


class EnvelopeError(SurroptError, RuntimeError):
    """Acceptance-rejection sampling failed (acceptance rate too low)."""


class ConfigError(SurroptError, ValueError):
    """An experiment configuration is malformed or references unknown ids."""


class FittingError(SurroptError, RuntimeError):
    """Hyperparameter fitting failed at every start point."""
