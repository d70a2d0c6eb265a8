"""Exception hierarchy shared by all modules.

The CLI maps these onto its exit-code contract: config problems exit 2,
stability (CFL-type) violations exit 3, domain violations exit 4.
"""


class BsdelabError(Exception):
    """Base class for all bsdelab errors."""


class ConfigError(BsdelabError):
    """Malformed or out-of-range run configuration."""


class StabilityError(BsdelabError):
    """Explicit-scheme stability condition violated (time step too large)."""


class DomainError(BsdelabError):
    """Argument outside the finiteness domain of a generator or conjugate."""
