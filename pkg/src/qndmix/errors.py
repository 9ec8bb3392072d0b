"""Exception hierarchy shared across the package."""


class QndmixError(Exception):
    """Base class for all package errors."""


class DomainError(QndmixError, ValueError):
    """An argument lies outside its declared domain (e.g. theta not in the box)."""


class ConstructionError(QndmixError, ValueError):
    """An object failed its construction-time validation."""


class CapabilityError(QndmixError, RuntimeError):
    """The object lacks the regularity required by the requested operation."""


class InferenceError(QndmixError, RuntimeError):
    """An observation is impossible under the model (zero-probability outcome)."""


class SingularFisherError(QndmixError, RuntimeError):
    """A per-component Fisher information matrix is singular; the experiment refuses to run."""


class ConfigError(QndmixError, ValueError):
    """A run configuration is malformed or references unknown entities."""
