"""Exception types shared across the package.

Config problems (bad dimensions, malformed scenario files, out-of-domain
parameters) raise ConfigError; numerical failures (solver residual above
tolerance, singular sample covariance) raise NumericalError. The CLI maps
them to exit codes 2 and 3.
"""


class ConfigError(ValueError):
    """Invalid configuration or out-of-domain argument."""


class NumericalError(RuntimeError):
    """A solver or factorization failed to reach its stated tolerance."""
