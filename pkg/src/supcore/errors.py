"""Exception hierarchy shared by all supcore modules."""


class SupcoreError(Exception):
    """Base class for every error raised by the toolkit."""


# -- instance construction / IO -------------------------------------------

class InstanceError(SupcoreError, ValueError):
    pass


class DuplicateId(InstanceError):
    pass


class DanglingArc(InstanceError):
    pass


class SelfLoop(InstanceError):
    pass


class BadKindArc(InstanceError):
    pass


class UnknownOrg(InstanceError):
    pass


class ShapeMismatch(InstanceError):
    pass


class SchemaError(SupcoreError, ValueError):
    """Malformed JSON document.  ``pointer`` is a JSON pointer to the bad field."""

    def __init__(self, pointer, message=""):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}" if message else pointer)


class OverlappingCycles(SupcoreError, ValueError):
    pass


# -- linear programming ---------------------------------------------------

class InfeasibleModel(SupcoreError):
    pass


class UnboundedObjective(SupcoreError):
    pass


class ArityMismatch(SupcoreError, ValueError):
    pass


# -- algorithms -----------------------------------------------------------

class InstanceTooLarge(SupcoreError):
    pass


class EmptyColumnSpace(SupcoreError):
    pass


class PivotBudgetExceeded(SupcoreError):
    pass


class CapacityViolation(SupcoreError):
    pass


class TargetMiss(SupcoreError):
    pass


class NonterminationGuard(SupcoreError):
    pass
