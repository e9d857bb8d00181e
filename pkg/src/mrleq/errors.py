"""Exception hierarchy shared by every module."""


class MrleqError(Exception):
    """Base class for all library errors."""


class ParameterDomainError(MrleqError, ValueError):
    """A distribution or model parameter lies outside its admissible range."""


class DomainError(MrleqError, ValueError):
    """An evaluation point or grid lies outside where the quantity is defined."""


class ResolutionError(MrleqError):
    """A numeric table is too coarse to certify the property it must carry."""


class ContractViolationError(MrleqError, ValueError):
    """A user-supplied callable broke its stated contract (e.g. monotonicity)."""


class InfiniteMomentError(MrleqError):
    """Tail integration did not converge; the moment is effectively infinite."""


class UnsupportedInputError(MrleqError):
    """The input lacks a capability the operation needs (e.g. a density)."""


class NoFixedPointError(MrleqError):
    """m(r) - r never changes sign inside the support."""


class InconsistencyError(MrleqError):
    """Two numerical results that must agree do not."""


class NoTransactionError(MrleqError, ValueError):
    """Realized demand does not exceed the wholesale price."""


class DegenerateInputError(MrleqError):
    """The objective is flat across the whole grid."""


class ConvergenceError(MrleqError):
    """An iterative solver hit its iteration cap."""


class SpecParseError(MrleqError, ValueError):
    """Malformed declarative distribution spec.

    ``pointer`` is a JSON pointer (RFC 6901) to the offending location.
    """

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")
