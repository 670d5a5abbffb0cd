"""Exception types shared across the package.

The CLI maps these onto its exit-code contract, so checks that a
particular failure mode occurred can catch a specific class instead of
parsing messages.
"""


class BosecorrError(Exception):
    """Base class for package-specific errors."""


class ParameterError(BosecorrError, ValueError):
    """A parameter is outside its valid domain (non-positive coupling, bad cutoff, ...)."""


class InvalidSiteError(ParameterError):
    """A site has coordinates outside [0, L) or the wrong dimension."""


class OccupationError(ParameterError):
    """An occupation pattern violates the per-site cutoff or the basis sector."""


class RegimeError(BosecorrError, ValueError):
    """A precondition of the bound regime is violated (v <= 2*kappa, R - r too small, ...)."""


class CapacityError(BosecorrError, RuntimeError):
    """A requested object exceeds the configured size budget."""


class ConfigError(BosecorrError, ValueError):
    """A run configuration fails schema validation."""


class PropagationError(BosecorrError, RuntimeError):
    """Time stepping failed to reach the requested accuracy."""
