"""Trajectories, problem definitions and base heuristics for deterministic DP.

A problem is described by its horizon, a successor function and a terminal
cost/feasibility pair defined on complete trajectories.  Partial trajectories
are immutable values; :func:`extend` and :func:`join` are the only ways the
rest of the toolkit builds new ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Optional, Protocol, Sequence

from .errors import InvalidControl, LengthError, Mismatch, StageOverflow
from . import rng as _rng


@dataclass(frozen=True)
class Trajectory:
    """Alternating state/control sequence ``(x_0, u_0, x_1, ..., u_{k-1}, x_k)``.

    A completion returned by a heuristic uses the same type; its first state
    is the last state of the partial trajectory it completes.
    """

    states: tuple
    controls: tuple = ()

    def __post_init__(self):
        if len(self.states) != len(self.controls) + 1:
            raise LengthError(
                f"{len(self.states)} states for {len(self.controls)} controls"
            )

    @classmethod
    def start(cls, x0) -> "Trajectory":
        return cls((x0,), ())

    @property
    def length(self) -> int:
        return len(self.controls)

    @property
    def first(self):
        return self.states[0]

    @property
    def last(self):
        return self.states[-1]

    def prefix(self, k: int) -> "Trajectory":
        return Trajectory(self.states[: k + 1], self.controls[:k])

    def suffix(self, k: int) -> "Trajectory":
        return Trajectory(self.states[k:], self.controls[k:])


def _product_candidates(component_candidates, agents):
    def candidates(k, y):
        sets = [list(component_candidates(k, y, l)) for l in range(agents)]
        return list(itertools.product(*sets))

    return candidates


@dataclass(frozen=True, eq=False)
class Problem:
    """Constrained deterministic DP problem.

    ``successor(k, x, u)`` is the system equation, ``candidates(k, y)`` the
    ordered raw control list at the end of partial trajectory ``y`` (before any
    feasibility filtering), ``cost`` and ``feasible`` act on complete
    trajectories.  Multiagent problems set ``agents`` and
    ``component_candidates(k, y, agent)``; their controls are tuples with one
    entry per agent, and ``candidates`` defaults to the Cartesian product.
    """

    horizon: int
    initial_state: Hashable
    successor: Callable[[int, Any, Any], Any]
    cost: Callable[[Trajectory], float]
    candidates: Optional[Callable[[int, Trajectory], Sequence]] = None
    feasible: Callable[[Trajectory], bool] = field(default=lambda t: True)
    agents: Optional[int] = None
    component_candidates: Optional[Callable[[int, Trajectory, int], Sequence]] = None
    name: str = "problem"

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if self.agents is not None and self.agents < 1:
            raise ValueError("agent count must be positive")
        if self.candidates is None:
            if self.component_candidates is None or self.agents is None:
                raise ValueError("need candidates or agents + component_candidates")
            object.__setattr__(
                self, "candidates", _product_candidates(self.component_candidates, self.agents)
            )

    @property
    def decomposed(self) -> bool:
        return self.agents is not None and self.component_candidates is not None

    def start(self) -> Trajectory:
        return Trajectory.start(self.initial_state)

    def controls(self, k: int, y: Trajectory) -> list:
        return list(self.candidates(k, y))

    def is_complete(self, t: Trajectory) -> bool:
        return t.length == self.horizon


class BaseHeuristic(Protocol):
    def complete(self, y: Trajectory) -> Optional[Trajectory]:
        """Completion from the last state of ``y`` to the horizon, or None."""


def extend(y: Trajectory, u, problem: Problem) -> Trajectory:
    k = y.length
    if k >= problem.horizon:
        raise StageOverflow(f"trajectory already has {k} = N stages")
    if u not in problem.controls(k, y):
        raise InvalidControl(f"{u!r} is not a candidate at stage {k}")
    x_next = problem.successor(k, y.last, u)
    return Trajectory(y.states + (x_next,), y.controls + (u,))


def join(y: Trajectory, completion: Trajectory, problem: Problem) -> Trajectory:
    if completion.first != y.last:
        raise Mismatch(f"completion starts at {completion.first!r}, expected {y.last!r}")
    k = y.length
    if k + completion.length != problem.horizon:
        raise LengthError(
            f"{k} + {completion.length} stages does not reach horizon {problem.horizon}"
        )
    for t, u in enumerate(completion.controls):
        x = completion.states[t]
        if problem.successor(k + t, x, u) != completion.states[t + 1]:
            raise Mismatch(f"completion violates the system equation at stage {k + t}")
    return Trajectory(y.states + completion.states[1:], y.controls + completion.controls)


def complete_with(problem: Problem, h: BaseHeuristic, y: Trajectory) -> Optional[Trajectory]:
    """``y`` joined with the heuristic completion ``R(y)``; None if ``h`` fails."""
    tail = h.complete(y)
    if tail is None:
        return None
    return join(y, tail, problem)


def one_step_then_heuristic(problem: Problem, h: BaseHeuristic, y: Trajectory, u):
    """The complete trajectory ``(y, u, R(y_next))``, or None on heuristic failure."""
    return complete_with(problem, h, extend(y, u, problem))


class PolicyHeuristic:
    """Heuristic that runs a feedback policy ``policy(k, y) -> control``.

    Any policy is sequentially consistent.  Returning None from the policy
    signals failure, which makes :meth:`complete` return None.
    """

    def __init__(self, problem: Problem, policy: Callable[[int, Trajectory], Any]):
        self.problem = problem
        self.policy = policy

    def complete(self, y: Trajectory) -> Optional[Trajectory]:
        cur = y
        while cur.length < self.problem.horizon:
            u = self.policy(cur.length, cur)
            if u is None:
                return None
            cur = extend(cur, u, self.problem)
        return cur.suffix(y.length)


class AgentPolicyHeuristic(PolicyHeuristic):
    """Policy heuristic for multiagent problems that can resume mid-stage.

    ``component_policy(k, y, chosen)`` returns the next agent's component given
    the components ``chosen`` so far at stage ``k``.
    """

    def __init__(self, problem: Problem, component_policy):
        if problem.agents is None:
            raise ValueError("AgentPolicyHeuristic needs a multiagent problem")
        self.component_policy = component_policy
        super().__init__(problem, self._full_control)

    def _full_control(self, k, y):
        return self._finish_control(k, y, ())

    def _finish_control(self, k, y, chosen):
        comps = tuple(chosen)
        while len(comps) < self.problem.agents:
            c = self.component_policy(k, y, comps)
            if c is None:
                return None
            comps += (c,)
        return comps

    def complete_stage(self, y: Trajectory, chosen: tuple) -> Optional[Trajectory]:
        k = y.length
        if k == self.problem.horizon:
            return None if chosen else Trajectory.start(y.last)
        u = self._finish_control(k, y, chosen)
        if u is None:
            return None
        rest = self.complete(extend(y, u, self.problem))
        if rest is None:
            return None
        return Trajectory((y.last,) + rest.states, (u,) + rest.controls)


def first_candidate_heuristic(problem: Problem) -> PolicyHeuristic:
    return PolicyHeuristic(problem, lambda k, y: problem.controls(k, y)[0])


# ---------------------------------------------------------------------------
# empirical property checks


@dataclass
class ProbeFinding:
    probe: Trajectory
    reason: str
    detail: Any = None


@dataclass
class CheckReport:
    checked: int = 0
    violations: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # probes where the heuristic failed
    not_applicable: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_sequential_consistency(
    h: BaseHeuristic, problem: Problem, probes: Sequence[Trajectory]
) -> CheckReport:
    """Resume ``h`` one step into its own completion and compare the tails."""
    report = CheckReport()
    for y in probes:
        k = y.length
        if k >= problem.horizon - 1:
            # resuming at the horizon leaves only the final state: nothing to compare
            report.not_applicable.append(y)
            continue
        tail = h.complete(y)
        if tail is None:
            report.failures.append(ProbeFinding(y, "heuristic failure"))
            continue
        report.checked += 1
        y_next = extend(y, tail.controls[0], problem)
        resumed = h.complete(y_next)
        if resumed is None:
            report.failures.append(ProbeFinding(y_next, "heuristic failure"))
            report.violations.append(ProbeFinding(y, "fails when resumed", tail))
        elif resumed != tail.suffix(1):
            report.violations.append(ProbeFinding(y, "tail differs", (tail, resumed)))
    return report


def check_sequential_improvement(
    h: BaseHeuristic, problem: Problem, probes: Sequence[Trajectory]
) -> CheckReport:
    """Check the one-step improvement inequality on each probe.

    A probe whose own heuristic completion is infeasible is recorded as not
    applicable.  Candidates whose heuristic completion fails count as
    infeasible.
    """
    report = CheckReport()
    for y in probes:
        if y.length >= problem.horizon:
            report.not_applicable.append(y)
            continue
        full = complete_with(problem, h, y)
        if full is None:
            report.failures.append(ProbeFinding(y, "heuristic failure"))
            continue
        if not problem.feasible(full):
            report.not_applicable.append(y)
            continue
        report.checked += 1
        base = problem.cost(full)
        best = None
        for u in problem.controls(y.length, y):
            t = one_step_then_heuristic(problem, h, y, u)
            if t is None or not problem.feasible(t):
                continue
            c = problem.cost(t)
            if best is None or c < best:
                best = c
        if best is None:
            report.violations.append(ProbeFinding(y, "no feasible one-step extension"))
        elif best > base:
            report.violations.append(ProbeFinding(y, "extension worse than own completion", (base, best)))
    return report


def random_probes(problem: Problem, h: BaseHeuristic, count: int, seed: int = 0) -> list:
    """Reachable partial trajectories from seeded playouts that mix heuristic
    moves with uniformly random candidates."""
    gen = _rng.stream(seed, _rng.PROBES)
    probes = []
    for _ in range(count):
        k_stop = int(gen.integers(0, problem.horizon + 1))
        y = problem.start()
        while y.length < k_stop:
            options = problem.controls(y.length, y)
            u = None
            if gen.random() < 0.5:
                tail = h.complete(y)
                if tail is not None:
                    u = tail.controls[0]
            if u is None:
                u = options[int(gen.integers(0, len(options)))]
            y = extend(y, u, problem)
        probes.append(y)
    return probes


__all__ = [
    "Trajectory",
    "Problem",
    "BaseHeuristic",
    "PolicyHeuristic",
    "AgentPolicyHeuristic",
    "first_candidate_heuristic",
    "extend",
    "join",
    "complete_with",
    "one_step_then_heuristic",
    "check_sequential_consistency",
    "check_sequential_improvement",
    "random_probes",
    "CheckReport",
    "ProbeFinding",
]
