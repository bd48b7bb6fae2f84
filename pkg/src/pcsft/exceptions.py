"""Exception hierarchy shared by all modules."""


class PCSFTError(ValueError):
    """Base class for invalid inputs to the simulator."""


class NotHermitian(PCSFTError):
    pass


class DimensionMismatch(PCSFTError):
    pass


class InvalidCovariance(PCSFTError):
    """Covariance is not Hermitian positive semidefinite within tolerance."""


class ZeroField(PCSFTError):
    """A covariance with vanishing trace has no associated state."""


class NotProjector(PCSFTError):
    pass


class NotOrthogonal(PCSFTError):
    pass


class Incomplete(PCSFTError):
    """Projectors do not sum to the identity."""


class NotTracePreserving(PCSFTError):
    pass


class InvalidState(PCSFTError):
    pass


class ConvergenceFailure(PCSFTError):
    pass


class SchemaError(PCSFTError):
    """Operator or channel file does not follow the expected layout."""
