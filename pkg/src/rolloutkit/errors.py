"""Exception types shared across the toolkit.

Errors that mean "the instance has no feasible answer" derive from
:class:`InfeasibleError`; the CLI maps those to exit code 2 and everything
else to exit code 1.
"""

from __future__ import annotations


class RolloutKitError(Exception):
    """Base class for every error raised by rolloutkit."""


class InfeasibleError(RolloutKitError):
    """The problem (or a requested sub-problem) admits no feasible solution."""


# trajectory core
class StageOverflow(RolloutKitError):
    pass


class InvalidControl(RolloutKitError):
    pass


class Mismatch(RolloutKitError):
    pass


class LengthError(RolloutKitError):
    pass


class HeuristicFailure(RolloutKitError):
    pass


# rollout engine
class InfeasibleStart(InfeasibleError):
    pass


class DeadEnd(RolloutKitError):
    def __init__(self, stage: int, message: str | None = None):
        self.stage = stage
        super().__init__(message or f"no feasible control at stage {stage}")


# multiagent
class NotDecomposed(RolloutKitError):
    pass


class IncompleteHeuristic(RolloutKitError):
    pass


# auction
class IsolatedPerson(InfeasibleError):
    def __init__(self, person: int):
        self.person = person
        super().__init__(f"person {person} has no allowed object")


class Infeasible(InfeasibleError):
    pass


class PriceInitError(RolloutKitError):
    pass


# multidimensional assignment
class InconsistentContext(RolloutKitError):
    pass


class InvalidSolution(RolloutKitError):
    pass


# discrete optimization / facility location
class InfeasiblePlacement(InfeasibleError):
    pass


class SizeGuard(RolloutKitError):
    pass


# oracle
class BudgetExceeded(RolloutKitError):
    pass


class NoFeasible(InfeasibleError):
    pass


# cli
class BadParams(RolloutKitError):
    pass
