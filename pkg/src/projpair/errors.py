"""Exception types shared across the package.

All errors raised on invalid *mathematical* input derive from
:class:`ProjPairError` so callers can distinguish them from programming
errors.  ``ValidationError`` is for malformed operators, ``SchemaError``
for malformed files.
"""


class ProjPairError(Exception):
    """Base class for all library errors."""


class ValidationError(ProjPairError):
    """Input violates a structural invariant (not Hermitian, not a projection, ...)."""


class NotFredholmError(ProjPairError):
    """The projection pair has an infinite cross intersection; no index exists."""


class NotTraceClassError(ProjPairError):
    """The difference is not trace class / Hilbert-Schmidt, corner traces diverge."""


class IndexObstruction(ProjPairError):
    """An integer (or defect) obstruction blocks the requested construction."""

    def __init__(self, obstruction, message=None):
        self.obstruction = obstruction
        super().__init__(message or f"index obstruction: {obstruction}")


class PreconditionFailed(ProjPairError):
    """A stated hypothesis of the operation does not hold for this input."""


class UnsupportedTailError(ProjPairError):
    """The symbolic tail cannot be realized as a concrete operator."""


class NotApplicableError(ProjPairError):
    """The operation is mathematically undefined for this input (e.g. a+b infinite)."""


class DefectPlacementError(ProjPairError):
    """Defect partial isometry cannot be placed under the complement projection."""


class ConsistencyError(ProjPairError):
    """Two routes that must agree produced different answers."""


class SchemaError(ProjPairError):
    """A JSON document does not match the projpair/1 schema."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
