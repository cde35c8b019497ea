"""Exception hierarchy shared by the library and the CLI.

Each class carries the exit code the CLI maps it to.
"""


class CreatureKitError(Exception):
    exit_code = 2


class InvalidInput(CreatureKitError):
    """Malformed or out-of-range input (bad JSON, index outside the window, ...)."""

    exit_code = 2


class SideConditionError(InvalidInput):
    """A system-specific constructor precondition does not hold."""


class CapExceeded(CreatureKitError):
    """An exponential search was asked to run on an instance above its budget."""

    exit_code = 3


class PropertyFailure(CreatureKitError):
    """A checked mathematical property failed; ``witness`` holds the counterexample."""

    exit_code = 1

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NoLink(CreatureKitError):
    """No common Σ-refinement exists for the requested pair."""

    exit_code = 1


class UnsupportedFunctional(InvalidInput):
    pass
