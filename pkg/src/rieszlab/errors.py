"""Exception hierarchy shared by all modules.

Two failure classes are distinguished because the CLI maps them to
different exit codes: malformed requests (exit 1) versus requests that
are well formed but land outside the numerical domain of an operation
(exit 2), such as coincident points or an exponent outside (0, d).
"""


class RieszlabError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RieszlabError):
    """Malformed or unsupported input (CLI exit code 1)."""


class DomainError(RieszlabError):
    """Numerical-domain violation: coincident points, exponent out of
    range, cut-locus log map (CLI exit code 2)."""
