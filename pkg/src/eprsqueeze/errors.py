"""Exception classes shared across the package.

The CLI maps these onto distinct exit codes (see cli.py): validation
problems, numerical failures and I/O problems must stay distinguishable.
"""


class EprSqueezeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EprSqueezeError):
    """A parameter, state or configuration violates its invariants."""


class SingularityError(EprSqueezeError):
    """A requested evaluation sits on (or numerically at) a pole."""


class DegenerateStateError(EprSqueezeError):
    """A Gaussian state is too degenerate for the requested operation."""


class DataFormatError(EprSqueezeError):
    """An input data file is missing, malformed or inconsistent."""
