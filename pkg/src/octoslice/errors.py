"""Error types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the domain an operation is defined on."""


class PreconditionError(ValueError):
    """A documented operation precondition was violated."""


class ConditioningError(ValueError):
    """Inputs are too close to a degenerate configuration to trust the result."""


class EmptySampleError(RuntimeError):
    """A sampling step produced no usable points."""


class IntegrityError(RuntimeError):
    """An internal consistency check failed (inconsistent certified data)."""
