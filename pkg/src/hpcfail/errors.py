"""Exception hierarchy.

Three families, each mapped to a CLI exit code:

* ``ModelError`` (exit 2): the model is well-formed but has no valid answer,
  e.g. a cap that would have to be negative.
* ``InputError`` (exit 3): a value or configuration is malformed.
* ``InvariantViolation`` (exit 4): a structural invariant does not hold.
"""

from __future__ import annotations


class FailureModelError(Exception):
    """Base class for every error raised by hpcfail."""

    exit_code = 1


class ModelError(FailureModelError):
    exit_code = 2


class Infeasible(ModelError):
    """The failure budget cannot be met with non-negative rates."""


class Underdetermined(ModelError):
    """More than one variable is unknown."""


class Overdetermined(ModelError):
    """The requested unknown is already fixed by the knowns."""


class Degenerate(ModelError):
    """The governing equation carries no information about the unknowns."""


class RecoveryExceedsOperation(ModelError):
    """Projected recovery time is longer than the operation time."""


class InputError(FailureModelError, ValueError):
    exit_code = 3


class ZeroRate(InputError):
    """A zero rate has no finite MTTF."""


class OutOfRange(InputError):
    pass


class EmptyGrid(InputError):
    pass


class UnmappedComponent(InputError):
    pass


class BadShare(InputError):
    pass


class ZeroOperationTime(InputError):
    pass


class Overflow(InputError):
    pass


class ConfigError(InputError):
    """Configuration file could not be parsed or validated."""


class InvariantViolation(FailureModelError, ValueError):
    exit_code = 4
