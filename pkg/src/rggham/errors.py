"""Exception types shared across the package.

Plain ``ValueError`` is used for ordinary contract violations (bad
dimensions, out-of-range parameters).  The classes below mark the
distinguished failure modes that callers may want to catch separately.
"""


class EmptyInputError(ValueError):
    """An operation that needs at least one/two items received fewer."""


class CapacityError(ValueError):
    """Instance exceeds a hard size ceiling of an exact algorithm."""


class UnsatisfiablePropertyError(ValueError):
    """A monotone property that is false even on the complete graph."""


class InfeasibleError(RuntimeError):
    """A requested combinatorial object (e.g. two disjoint paths) does not exist."""
