"""Exception types shared across the package."""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ToolkitError, ValueError):
    """Matrix or vector dimensions are inconsistent, odd, or nonpositive."""


class RealizabilityError(ToolkitError, ValueError):
    """A system violates, or would violate, the physical realizability identities."""


class StabilityError(ToolkitError, ValueError):
    """A matrix required to be Hurwitz is not."""


class InfeasibleError(ToolkitError, RuntimeError):
    """Observer synthesis cannot proceed for the given plant and gain."""


class NumericalError(ToolkitError, RuntimeError):
    """Numerical failure: divergence, failed solve, or residual above tolerance."""


class InvalidStateError(ToolkitError, ValueError):
    """A Gaussian state or covariance block violates symmetry/positivity."""


class ConfigError(ToolkitError, ValueError):
    """Experiment configuration is missing, malformed, or inconsistent."""
