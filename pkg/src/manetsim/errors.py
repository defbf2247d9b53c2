"""Exception types shared across the simulator."""


class SimError(Exception):
    """Base class for all simulator errors."""

    code = "sim-error"


class ConfigError(SimError, ValueError):
    """Invalid experiment configuration."""

    code = "config-error"


class RegimeError(SimError, ValueError):
    """Parameters outside the operating regime of a scheme (e.g. coded block floors to zero)."""

    code = "regime-error"


class DomainError(SimError, ValueError):
    """Argument outside the mathematical domain of a formula."""

    code = "domain-error"


class UnsupportedConfigError(SimError, ValueError):
    """Configuration shape the implementation deliberately does not support."""

    code = "unsupported-configuration"


class InfeasibleRateError(SimError, ValueError):
    """Coded-packet budget below the data block size."""

    code = "infeasible-rate"


class IntegrityError(SimError, ValueError):
    """Packet identity does not belong to the block being decoded."""

    code = "integrity-error"


class MisuseError(SimError, ValueError):
    """API called under the wrong scheme."""

    code = "misuse-error"


class ParameterError(SimError, ValueError):
    """Monte-Carlo check invoked with parameters outside the lemma's hypotheses."""

    code = "parameter-error"


class InsufficientDataError(SimError, ValueError):
    """Not enough data points for a fit."""

    code = "insufficient-data"


class BoundViolationError(SimError, AssertionError):
    """Measured throughput exceeded a theorem bound; indicates an implementation bug."""

    code = "bound-violation"
