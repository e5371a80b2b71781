class ResourceError(RuntimeError):
    """A computation would exceed its enumeration budget."""


class DefectError(RuntimeError):
    """An internal invariant failed; this indicates a bug, never bad input."""


class NotShannonError(ValueError):
    """A claimed inequality has no Shannon (Farkas) derivation."""
