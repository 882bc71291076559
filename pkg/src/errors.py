from typing import Optional


class StageError(Exception):
    """Root of every error raised by the stage control library."""

    stage: Optional[str] = None


class ConfigError(StageError, ValueError):
    """Invalid configuration file, schema violation or malformed literal."""


class NumericalError(StageError, ArithmeticError):
    """A numerical precondition or postcondition failed."""

    def __init__(self, message: str, point: Optional[tuple[float, float]] = None):
        if point is not None:
            message = f"{message} (at q_x={point[0]:.6g}, q_y={point[1]:.6g})"
        super().__init__(message)
        self.point = point


class NonSymmetricError(NumericalError):
    pass


class NonProportionalDampingError(NumericalError):
    pass


class EigSolveFailure(NumericalError):
    pass


class RankDeficientError(NumericalError):
    pass


class OutOfWorkspaceError(NumericalError):
    pass


class SingularDiscardedBlockError(NumericalError):
    pass


class NonFiniteError(NumericalError):
    pass


class NotDetectableError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    pass


class LengthMismatchError(NumericalError):
    pass


class DegenerateRegressorError(NumericalError):
    pass


class InfeasibleConstraintsError(NumericalError):
    """Only raised when constraints are requested to hold exactly (strict mode)."""


class RankDeficientActuationError(NumericalError):
    pass


class AboveNyquistError(NumericalError):
    pass


class InfeasibleLimitsError(NumericalError):
    pass


class TsMismatchError(NumericalError):
    pass


class NonFiniteStateError(NumericalError):
    pass


class UnstableLoopError(NumericalError):
    pass


class WindowTooLongError(NumericalError):
    pass


class TooShortError(NumericalError):
    pass


class EmptyBandError(NumericalError):
    pass


class IllPosedError(NumericalError):
    pass
