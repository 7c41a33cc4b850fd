class NsboxError(Exception):
    """Base class for domain errors raised by nsbox."""


class ShapeError(NsboxError):
    """Entries do not match the declared scenario (structural, not a constraint violation)."""


class SignalingError(NsboxError):
    """An operation that needs well-defined marginals received a signaling table."""


class BudgetExceeded(NsboxError):
    """A search would exceed its configured size budget."""


class SpecError(NsboxError):
    """Invalid parameters for one of the catalog constructors."""


class FormatError(NsboxError):
    """Malformed exchange document."""
