"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ParameterError -> 1, ResourceError -> 2.
"""


class TasepLabError(Exception):
    """Base class for all package errors."""


class ParameterError(TasepLabError):
    """Invalid user-supplied parameters (rates, probabilities, config keys)."""


class DomainError(TasepLabError):
    """Point outside the wedge W, the cone W', or a function's domain."""


class PathError(TasepLabError):
    """A vertex sequence is not an admissible lattice path."""


class BracketError(TasepLabError):
    """Root or extremum could not be bracketed inside the configured interval."""


class ResourceError(TasepLabError):
    """Requested table exceeds the configured memory budget."""


class InvariantError(TasepLabError):
    """Internal state violates a structural invariant (corrupt environment,
    jammed ring, argmax off the kink)."""
