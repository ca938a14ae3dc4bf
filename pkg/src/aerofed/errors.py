"""Exception hierarchy shared by all aerofed modules."""


class AerofedError(Exception):
    """Base class for every error raised by this package."""


class DuplicateResource(AerofedError):
    """A resource with this id is already present in the catalog."""


class InsufficientResources(AerofedError):
    """A demand cannot be satisfied from the free capacity.

    ``demand`` names the first unsatisfiable demand.
    """

    def __init__(self, message: str, demand=None):
        super().__init__(message)
        self.demand = demand


class UnknownReservation(AerofedError):
    """No reservation with this id exists (or it was already released)."""


class UndefinedDelay(AerofedError):
    """Per-request delay is undefined: misses occur but the rate is zero."""


class ProblemTooLarge(AerofedError):
    """Brute-force enumeration refused: too many slices."""


class DuplicateOffer(AerofedError):
    """An offer with this id was already submitted to the engine."""


class UnknownRequest(AerofedError):
    """No request with this id has been handled by the engine."""


class NotAllocated(AerofedError):
    """The request holds no live allocation (rejected or already released)."""


class MalformedDocument(AerofedError):
    """A wire document failed to parse.

    ``offset`` is the byte offset of the first problem when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


# Northbound request documents that fail validation surface under this
# name at the federation API, per the flow contract.
MalformedRequest = MalformedDocument


class UnsupportedVersion(AerofedError):
    """Document carries a schema_version this implementation does not speak."""


class InvariantViolation(AerofedError):
    """A parsed document violates a field invariant.

    ``field`` names the offending field.
    """

    def __init__(self, field: str, message: str | None = None):
        super().__init__(message or f"invariant violated: {field}")
        self.field = field


class InvalidScenario(AerofedError):
    """A simulation scenario fails its invariants."""
