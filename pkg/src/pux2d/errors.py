"""Exception types raised by the pux2d pipeline."""


class Pux2dError(Exception):
    """Base class for all pux2d errors."""


class ConfigError(Pux2dError):
    """Invalid or inconsistent solver configuration."""


class AmbiguousPointError(Pux2dError):
    """A query point is numerically on the domain boundary."""


class InsufficientDataError(Pux2dError):
    """Too few grid points inside the partition radius for the requested centers."""


class SingularBasisError(Pux2dError):
    """The stabilized basis retained too few usable directions."""


class UnderdeterminedError(Pux2dError):
    """A local least-squares problem has fewer data rows than unknowns."""


class SnapFailureError(Pux2dError):
    """No interior grid node lies within the partition radius of a requested center."""


class CoverageGapError(Pux2dError):
    """A grid node adjacent to the boundary is not covered by any partition."""


class NotCoveredError(Pux2dError):
    """A grid node carries zero weight from every partition."""


class NoConvergenceError(Pux2dError):
    """Iterative solve exhausted its iteration budget."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class OutOfBoxError(Pux2dError):
    """An evaluation point lies outside the computational box."""


class OnPanelError(Pux2dError):
    """A target point coincides with a quadrature panel."""


class UnknownIdError(Pux2dError):
    """Unknown builtin problem identifier."""


class EmptyMaskError(Pux2dError):
    """An error metric was requested over an empty point selection."""


class StageError(Pux2dError):
    """Wraps a failure inside a named pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
