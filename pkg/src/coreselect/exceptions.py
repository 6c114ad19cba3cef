"""Exception taxonomy. The CLI maps these onto exit codes."""


class CoresetError(Exception):
    """Base class for all package errors."""


class ConfigError(CoresetError):
    """Invalid configuration: bad budget, step size, flag combination."""


class DataError(CoresetError):
    """Malformed or unreadable data: files, headers, shapes, labels."""


class EmptyCoresetError(CoresetError):
    """An inner fit was requested on an empty subset."""


class ImpossibleOutcomeError(CoresetError):
    """A mask contradicts a degenerate probability entry (p would be 0)."""


class RunAbortedError(CoresetError):
    """The outer loop cannot continue (non-finite gradient, sampling stall)."""
