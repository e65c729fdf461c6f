"""Exception hierarchy shared by the library and the CLI.

The CLI maps DomainError (and subclasses) to exit code 2 and
ConvergenceError to exit code 3.
"""


class DomainError(ValueError):
    """Input outside an operation's documented domain."""


class RegimeError(DomainError):
    """(p, q) values outside the regime required by the operation."""


class SizeCapError(DomainError):
    """Exact-rational mode invoked beyond its documented size cap."""


class ConvergenceError(RuntimeError):
    """A truncated series failed to meet its tolerance within the term cap."""
