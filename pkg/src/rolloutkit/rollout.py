"""Constrained rollout: plain, fortified and tree-based variants.

All three variants evaluate a candidate control ``u`` at partial trajectory
``y`` by building ``T(y, u) = (y, u, R(y, u, f(x, u)))`` with the base
heuristic and checking the complete trajectory against the problem's
feasibility predicate.  Ties are broken by candidate order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import DeadEnd, InfeasibleStart
from .trajectory import BaseHeuristic, Problem, Trajectory, complete_with, extend


@dataclass(frozen=True)
class StageRecord:
    """One stage (or one tree expansion) of a rollout run."""

    stage: int
    tried: tuple
    feasible: int
    chosen: Any
    chain_cost: float
    calls: int
    case: str = "argmin"
    agent: Optional[int] = None

    def as_dict(self) -> dict:
        return {
            "stage": self.stage,
            "agent": self.agent,
            "tried": [_jsonable(u) for u in self.tried],
            "feasible": self.feasible,
            "chosen": _jsonable(self.chosen),
            "chain_cost": self.chain_cost,
            "calls": self.calls,
            "case": self.case,
        }


def _jsonable(u):
    if isinstance(u, tuple):
        return [_jsonable(v) for v in u]
    return u


@dataclass(frozen=True)
class RolloutOutcome:
    trajectory: Trajectory
    cost: float
    chain: tuple
    heuristic_calls: int
    baseline_trajectory: Trajectory
    baseline: float
    trace: tuple = field(default=(), compare=False)

    @property
    def controls(self) -> tuple:
        return self.trajectory.controls

    def calls_per_stage(self) -> dict:
        out: dict = {}
        for rec in self.trace:
            out[rec.stage] = out.get(rec.stage, 0) + rec.calls
        return out


class _Counting:
    def __init__(self, h: BaseHeuristic):
        self.h = h
        self.calls = 0

    def complete(self, y):
        self.calls += 1
        return self.h.complete(y)


def _baseline(problem: Problem, h) -> tuple[Trajectory, float]:
    base = complete_with(problem, h, problem.start())
    if base is None:
        raise InfeasibleStart("base heuristic fails at the initial state")
    if not problem.feasible(base):
        raise InfeasibleStart("base heuristic trajectory from the initial state is infeasible")
    return base, problem.cost(base)


def _evaluate(problem: Problem, h, y: Trajectory):
    """Feasible one-step-then-heuristic trajectories at ``y`` in candidate order."""
    tried = problem.controls(y.length, y)
    found = []
    for u in tried:
        t = complete_with(problem, h, extend(y, u, problem))
        if t is None or not problem.feasible(t):
            continue
        found.append((u, t, problem.cost(t)))
    return tuple(tried), found


def _argmin(found):
    best = None
    for item in found:
        if best is None or item[2] < best[2]:
            best = item
    return best


def rollout(problem: Problem, h: BaseHeuristic) -> RolloutOutcome:
    counter = _Counting(h)
    base, base_cost = _baseline(problem, counter)
    y = problem.start()
    chain, trace = [], []
    for k in range(problem.horizon):
        before = counter.calls
        tried, found = _evaluate(problem, counter, y)
        if not found:
            raise DeadEnd(k)
        u, _, c = _argmin(found)
        chain.append(c)
        trace.append(StageRecord(k, tried, len(found), u, c, counter.calls - before))
        y = extend(y, u, problem)
    return RolloutOutcome(
        y, problem.cost(y), tuple(chain), counter.calls, base, base_cost, tuple(trace)
    )


def fortified_rollout(problem: Problem, h: BaseHeuristic) -> RolloutOutcome:
    counter = _Counting(h)
    base, base_cost = _baseline(problem, counter)
    best, best_cost = base, base_cost
    y = problem.start()
    chain, trace = [], []
    for k in range(problem.horizon):
        before = counter.calls
        tried, found = _evaluate(problem, counter, y)
        pick = _argmin([f for f in found if f[2] <= best_cost])
        if pick is not None:
            u, best, best_cost = pick
            case = "argmin"
        else:
            # follow the tentative best trajectory, which stays unchanged
            u = best.controls[k]
            case = "follow-best"
        chain.append(best_cost)
        trace.append(StageRecord(k, tried, len(found), u, best_cost, counter.calls - before, case))
        y = extend(y, u, problem)
    assert y == best
    return RolloutOutcome(
        best, best_cost, tuple(chain), counter.calls, base, base_cost, tuple(trace)
    )


@dataclass
class _Node:
    traj: Trajectory
    seq: int
    best: Optional[Trajectory] = None
    best_cost: float = math.inf


def tree_rollout(problem: Problem, h: BaseHeuristic, budget: int) -> RolloutOutcome:
    """Fortified tree-based rollout with ``budget`` node expansions.

    The next node to expand is the unexpanded one whose best known complete
    trajectory is cheapest; ties go to the deeper node, then to the node
    carrying the current tentative best, then to the earlier-created node.
    With ``budget = N`` this retraces :func:`fortified_rollout` exactly.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    counter = _Counting(h)
    base, base_cost = _baseline(problem, counter)
    best, best_cost = base, base_cost
    seq = 0
    leaves = [_Node(problem.start(), seq, base, base_cost)]
    chain, trace = [], []
    expansions = 0
    while expansions < budget and leaves:
        node = min(
            leaves,
            key=lambda n: (n.best_cost, -n.traj.length, 0 if n.best == best else 1, n.seq),
        )
        leaves.remove(node)
        expansions += 1
        k = node.traj.length
        before = counter.calls
        tried, found = _evaluate(problem, counter, node.traj)
        children = []
        for u in tried:
            y_next = extend(node.traj, u, problem)
            child = _Node(y_next, 0)
            if node.best is not None and node.best.prefix(k + 1) == y_next:
                child.best, child.best_cost = node.best, node.best_cost
            for _, t, c in found:
                if t.prefix(k + 1) == y_next and (child.best is None or c <= child.best_cost):
                    child.best, child.best_cost = t, c
            children.append(child)
        pick = _argmin(found)
        if pick is not None and pick[2] <= best_cost:
            best, best_cost = pick[1], pick[2]
        if k + 1 < problem.horizon:
            for child in children:
                seq += 1
                child.seq = seq
                leaves.append(child)
        chain.append(best_cost)
        trace.append(
            StageRecord(
                k, tried, len(found), pick[0] if pick else None, best_cost,
                counter.calls - before, "expand",
            )
        )
    return RolloutOutcome(
        best, best_cost, tuple(chain), counter.calls, base, base_cost, tuple(trace)
    )


def run_variant(problem: Problem, h: BaseHeuristic, variant: str = "fortified", budget: int | None = None):
    if variant == "plain":
        return rollout(problem, h)
    if variant == "fortified":
        return fortified_rollout(problem, h)
    if variant == "tree":
        return tree_rollout(problem, h, budget if budget is not None else problem.horizon)
    raise ValueError(f"unknown rollout variant {variant!r}")
