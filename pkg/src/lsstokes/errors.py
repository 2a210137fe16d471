"""Exception types raised by the solver components."""


class InvalidOrderError(ValueError):
    """Quadrature / polynomial order outside the supported range."""


class GeometryError(ValueError):
    """Degenerate, inverted or inconsistent element geometry."""


class LayoutError(ValueError):
    """A DOF vector does not match the expected field layout."""


class NotSPDError(ValueError):
    """A matrix expected to be symmetric positive definite is not."""


class DivergenceError(RuntimeError):
    """Non-finite values appeared during an iterative solve."""
