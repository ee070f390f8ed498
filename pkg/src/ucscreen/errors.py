"""Exception hierarchy shared by every module."""

from __future__ import annotations


class UcScreenError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(UcScreenError, ValueError):
    pass


class DisconnectedGraph(UcScreenError, ValueError):
    pass


class SingularSusceptanceMatrix(UcScreenError, ValueError):
    pass


class NumericalBreakdown(UcScreenError, RuntimeError):
    """Simplex exhausted its pivot budget or hit a singular basis."""


class NodeBudgetExceeded(UcScreenError, RuntimeError):
    """Branch-and-bound hit its node or depth cap before proving optimality."""


class InfeasibleProblem(UcScreenError, RuntimeError):
    pass


class TooFewPoints(UcScreenError, ValueError):
    pass


class DegenerateSegment(UcScreenError, ValueError):
    pass


class OutOfFittedRange(UcScreenError, ValueError):
    pass


class EmptyHistory(UcScreenError, ValueError):
    pass


class InvalidRange(UcScreenError, ValueError):
    pass


class ConfigMismatch(UcScreenError, ValueError):
    pass


class LineSetMismatch(UcScreenError, ValueError):
    pass


class InvalidSplit(UcScreenError, ValueError):
    pass


class IslandingOutage(UcScreenError, ValueError):
    pass


class StageError(UcScreenError):
    """Pipeline failure tagged with the stage that raised it.

    ``exit_code`` is what the CLI returns for this stage.
    """

    EXIT_CODES = {"data": 2, "fit": 3, "screen": 4, "solve": 5, "eval": 6, "io": 7}

    def __init__(self, stage: str, cause: BaseException | str):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")

    @property
    def exit_code(self) -> int:
        return self.EXIT_CODES.get(self.stage, 1)
