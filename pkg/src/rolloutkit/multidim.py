"""Multidimensional assignment: enforced separation and its rollout driver.

Layers are numbered ``0..N`` and layer pair ``p`` links layer ``p`` to layer
``p + 1``; for three layers these are jobs, machines and workers.  A
:class:`SeparationContext` records node pairs already fixed in each layer
pair.  The heuristic sweeps the layer pairs backwards, each time solving one
2D assignment on the still-free nodes with costs minimized over every prefix
chain consistent with the fixed pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .auction import AssignmentInstance, auction_scaled
from .errors import BudgetExceeded, InconsistentContext, InvalidSolution

DEFAULT_TUPLE_BUDGET = 10**6


@dataclass(frozen=True, eq=False)
class MultiAssignInstance:
    """``layers`` layers of ``m`` nodes and an integer grouping cost.

    Give either a dense integer tensor of shape ``(m,) * layers`` or a pure
    callable on ``layers``-tuples.
    """

    layers: int
    m: int
    costs: Optional[np.ndarray] = None
    cost_fn: Optional[Callable[[tuple], int]] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.layers < 3:
            raise ValueError("need at least three layers")
        if self.m < 1:
            raise ValueError("need at least one node per layer")
        if (self.costs is None) == (self.cost_fn is None):
            raise ValueError("give exactly one of a cost tensor or a cost callable")
        if self.costs is not None:
            arr = np.asarray(self.costs)
            if arr.shape != (self.m,) * self.layers:
                raise ValueError(f"cost tensor shape {arr.shape} does not match layers/m")
            if not np.issubdtype(arr.dtype, np.integer):
                if not np.all(arr == np.round(arr)):
                    raise ValueError("grouping costs must be integers")
            arr = arr.astype(np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, "costs", arr)

    @classmethod
    def dense(cls, tensor, meta=None) -> "MultiAssignInstance":
        arr = np.asarray(tensor)
        return cls(arr.ndim, arr.shape[0], costs=arr, meta=dict(meta or {}))

    @property
    def N(self) -> int:
        return self.layers - 1

    def cost(self, t: tuple) -> int:
        if self.costs is not None:
            return int(self.costs[tuple(t)])
        return int(self.cost_fn(tuple(t)))


@dataclass(frozen=True)
class MultiAssignSolution:
    groupings: tuple
    cost: int

    @classmethod
    def build(cls, instance: MultiAssignInstance, groupings) -> "MultiAssignSolution":
        groups = tuple(sorted(tuple(int(v) for v in g) for g in groupings))
        sol = cls(groups, sum(instance.cost(g) for g in groups))
        sol.validate(instance)
        return sol

    def validate(self, instance: MultiAssignInstance) -> None:
        """Raise :class:`InvalidSolution` unless the groupings partition every layer."""
        if len(self.groupings) != instance.m:
            raise InvalidSolution(f"{len(self.groupings)} groupings for m = {instance.m}")
        for g in self.groupings:
            if len(g) != instance.layers:
                raise InvalidSolution(f"grouping {g} does not have one node per layer")
        for layer in range(instance.layers):
            nodes = sorted(g[layer] for g in self.groupings)
            if nodes != list(range(instance.m)):
                raise InvalidSolution(f"layer {layer} is not covered exactly once")
        total = sum(instance.cost(g) for g in self.groupings)
        if total != self.cost:
            raise InvalidSolution(f"stated cost {self.cost} differs from recomputed {total}")

    def pairs(self, p: int) -> dict:
        return {g[p]: g[p + 1] for g in self.groupings}

    def to_json(self) -> dict:
        return {"groupings": [list(g) for g in self.groupings], "cost": self.cost}


@dataclass(frozen=True)
class SeparationContext:
    """Fixed pairs per layer pair, stored as sorted ``(left, right)`` tuples."""

    fixed: tuple

    @classmethod
    def empty(cls, n_pairs: int) -> "SeparationContext":
        return cls(tuple(() for _ in range(n_pairs)))

    def __post_init__(self):
        for p, pairs in enumerate(self.fixed):
            lefts = [a for a, _ in pairs]
            rights = [b for _, b in pairs]
            if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
                raise InconsistentContext(f"fixed pairs of layer pair {p} are not one-to-one")

    def with_pair(self, p: int, left: int, right: int) -> "SeparationContext":
        fixed = list(self.fixed)
        fixed[p] = tuple(sorted(fixed[p] + ((left, right),)))
        return SeparationContext(tuple(fixed))

    def forward(self, p: int) -> dict:
        return dict(self.fixed[p])

    def backward(self, p: int) -> dict:
        return {b: a for a, b in self.fixed[p]}

    def check(self, instance: MultiAssignInstance) -> None:
        if len(self.fixed) != instance.N:
            raise InconsistentContext("context has the wrong number of layer pairs")
        for pairs in self.fixed:
            for a, b in pairs:
                if not (0 <= a < instance.m and 0 <= b < instance.m):
                    raise InconsistentContext(f"fixed pair {(a, b)} out of range")


@dataclass(frozen=True)
class SeparationRun:
    """Result of one enforced-separation call."""

    solution: MultiAssignSolution
    solves: int  # 2D problems posed, one per layer pair
    nonempty_solves: int
    rounds: int


@dataclass
class RolloutStats:
    initial_solves: int = 0
    stage_solves: list = field(default_factory=list)
    final_solves: int = 0
    heuristic_calls: int = 0
    rounds: int = 0
    cases: list = field(default_factory=list)

    @property
    def rollout_phase_solves(self) -> int:
        return sum(self.stage_solves) + self.final_solves

    @property
    def total_solves(self) -> int:
        return self.initial_solves + self.rollout_phase_solves

    def as_dict(self) -> dict:
        return {
            "initial_solves": self.initial_solves,
            "stage_solves": list(self.stage_solves),
            "final_solves": self.final_solves,
            "rollout_phase_solves": self.rollout_phase_solves,
            "total_solves": self.total_solves,
            "heuristic_calls": self.heuristic_calls,
            "auction_rounds": self.rounds,
            "cases": list(self.cases),
        }


@dataclass(frozen=True)
class MultiRolloutResult:
    solution: MultiAssignSolution
    heuristic: MultiAssignSolution  # enforced separation from the empty context
    stats: RolloutStats


def _prefixes(ctx: SeparationContext, p: int, x: int, m: int):
    """All node chains over layers ``0..p-1`` that can precede ``x`` in layer ``p``."""
    if p == 0:
        yield ()
        return
    back = ctx.backward(p - 1)
    if x in back:
        sources = (back[x],)
    else:
        used = ctx.forward(p - 1)
        sources = tuple(z for z in range(m) if z not in used)
    for z in sources:
        for pre in _prefixes(ctx, p - 1, z, m):
            yield pre + (z,)


def _suffix(ctx: SeparationContext, p: int, y: int, n_pairs: int) -> tuple:
    """Chain from ``y`` in layer ``p + 1`` through the (fully fixed) later pairs."""
    out = ()
    node = y
    for q in range(p + 1, n_pairs):
        node = ctx.forward(q)[node]
        out += (node,)
    return out


def _solve_pair(rows, cols, cost, warm: Optional[dict], key):
    """Min-cost assignment of ``rows`` to ``cols``; returns mapping and rounds."""
    if not rows:
        return {}, 0
    benefits = [[-cost[(x, y)] for y in cols] for x in rows]
    inst = AssignmentInstance(benefits, trusted=True)
    prices = None
    if warm is not None:
        prices = [warm.get((key, y), 0) for y in cols]
    res = auction_scaled(inst, prices)
    if warm is not None:
        for y, pr in zip(cols, res.prices):
            warm[(key, y)] = pr
    return {rows[i]: cols[j] for i, j in enumerate(res.assignment)}, res.rounds


def enforced_separation(
    instance: MultiAssignInstance,
    ctx: Optional[SeparationContext] = None,
    warm: Optional[dict] = None,
    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
) -> SeparationRun:
    """Enforced-separation heuristic for any number of layers.

    Pairs in ``ctx`` stay fixed.  ``warm`` is an optional dict of prices keyed
    by ``(layer pair, object node)`` that is read before and updated after
    every 2D solve.
    """
    n_pairs = instance.N
    m = instance.m
    ctx = ctx or SeparationContext.empty(n_pairs)
    ctx.check(instance)
    solves = nonempty = rounds = 0
    enumerated = 0
    for p in range(n_pairs - 1, -1, -1):
        fwd = ctx.forward(p)
        back = ctx.backward(p)
        rows = [x for x in range(m) if x not in fwd]
        cols = [y for y in range(m) if y not in back]
        cost = {}
        for y in cols:
            tail = _suffix(ctx, p, y, n_pairs)
            for x in rows:
                best = None
                for pre in _prefixes(ctx, p, x, m):
                    enumerated += 1
                    if enumerated > tuple_budget:
                        raise BudgetExceeded(
                            f"prefix minimization passed {tuple_budget} tuples"
                        )
                    c = instance.cost(pre + (x, y) + tail)
                    if best is None or c < best:
                        best = c
                if best is None:
                    raise InconsistentContext(f"node {x} of layer {p} has no consistent prefix")
                cost[(x, y)] = best
        mapping, r = _solve_pair(rows, cols, cost, warm, p)
        solves += 1
        nonempty += bool(rows)
        rounds += r
        for x, y in mapping.items():
            ctx = ctx.with_pair(p, x, y)
    groups = []
    for j in range(m):
        g = (j,)
        for p in range(n_pairs):
            g += (ctx.forward(p)[g[-1]],)
        groups.append(g)
    return SeparationRun(MultiAssignSolution.build(instance, groups), solves, nonempty, rounds)


def enforced_separation_3d(instance: MultiAssignInstance, ctx: Optional[SeparationContext] = None, warm=None) -> SeparationRun:
    """Three-layer enforced separation: machines to workers on min-over-jobs
    costs, then jobs to machines given the chosen workers."""
    if instance.layers != 3:
        raise ValueError("enforced_separation_3d needs a three-layer instance")
    return enforced_separation(instance, ctx, warm)


def enforced_separation_nd(
    instance: MultiAssignInstance,
    ctx: Optional[SeparationContext] = None,
    warm=None,
    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
) -> SeparationRun:
    if instance.layers < 4:
        raise ValueError("enforced_separation_nd needs four or more layers")
    return enforced_separation(instance, ctx, warm, tuple_budget)


def closed_form_nd_count(m: int, N: int) -> int:
    """The closed-form heuristic solve count ``(m + 1)(N - 2)`` quoted for N > 2."""
    return (m + 1) * (N - 2)


def _rollout(instance, warm_start: bool, tuple_budget: int) -> MultiRolloutResult:
    n_pairs = instance.N
    m = instance.m
    stats = RolloutStats()
    ctx = SeparationContext.empty(n_pairs)

    start = enforced_separation(instance, ctx, None, tuple_budget)
    stats.initial_solves = start.solves
    stats.rounds += start.rounds
    stats.heuristic_calls += 1
    best = start.solution

    for p in range(n_pairs - 1):
        for x in range(m):
            taken = ctx.backward(p)
            remaining = [y for y in range(m) if y not in taken]
            warm = {} if warm_start else None
            trials = []
            solves = 0
            for y in remaining:
                run = enforced_separation(instance, ctx.with_pair(p, x, y), warm, tuple_budget)
                stats.heuristic_calls += 1
                stats.rounds += run.rounds
                solves += run.solves
                trials.append((y, run.solution))
            stats.stage_solves.append(solves)
            pick = None
            for y, sol in trials:
                if pick is None or sol.cost < pick[1].cost:
                    pick = (y, sol)
            if pick is not None and pick[1].cost <= best.cost:
                y, best = pick
                stats.cases.append("argmin")
            else:
                y = best.pairs(p)[x]
                stats.cases.append("follow-best")
            ctx = ctx.with_pair(p, x, y)

    # all earlier pairs are fixed: one exact 2D solve for the last layer pair
    last = n_pairs - 1
    chains = {}
    for x in range(m):
        pre = next(_prefixes(ctx, last, x, m))
        chains[x] = pre
    cost = {(x, y): instance.cost(chains[x] + (x, y)) for x in range(m) for y in range(m)}
    mapping, r = _solve_pair(list(range(m)), list(range(m)), cost, None, last)
    stats.final_solves = 1
    stats.rounds += r
    groups = [chains[x] + (x, mapping[x]) for x in range(m)]
    final = MultiAssignSolution.build(instance, groups)
    assert final.cost <= best.cost
    return MultiRolloutResult(final, start.solution, stats)


def rollout_3d(instance: MultiAssignInstance, warm_start: bool = True) -> MultiRolloutResult:
    """Fortified rollout fixing job-machine pairs one job at a time.

    Each job tries every machine still free; the trial count per job shrinks
    by one as jobs are fixed.  A final 2D solve assigns workers.
    """
    if instance.layers != 3:
        raise ValueError("rollout_3d needs a three-layer instance")
    return _rollout(instance, warm_start, DEFAULT_TUPLE_BUDGET)


def rollout_nd(
    instance: MultiAssignInstance,
    warm_start: bool = True,
    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
) -> MultiRolloutResult:
    """Rollout over layer pairs ``0..N-2`` node by node, last pair solved at the end."""
    if instance.layers < 4:
        raise ValueError("rollout_nd needs four or more layers")
    return _rollout(instance, warm_start, tuple_budget)


def stated_3d_ledger(m: int) -> int:
    """Rollout-phase 2D solve total as stated for three layers: ``m^2 + 1``."""
    return m * m + 1


def itemized_3d_ledger(m: int) -> list:
    """Per-job solve counts ``2m, 2(m-1), ..., 2``."""
    return [2 * (m - k) for k in range(m)]


def instance_to_json(instance: MultiAssignInstance) -> dict:
    if instance.costs is None:
        raise ValueError("callable-cost instances cannot be serialized")
    return {
        "layers": instance.layers,
        "m": instance.m,
        "costs": [int(v) for v in instance.costs.reshape(-1)],
    }


def instance_from_json(d: dict) -> MultiAssignInstance:
    layers, m = int(d["layers"]), int(d["m"])
    flat = d.get("costs")
    if flat is None:
        raise ValueError("instance file has no cost tensor")
    if len(flat) != m**layers:
        raise ValueError("cost array length does not match m ** layers")
    arr = np.asarray(flat, dtype=np.int64).reshape((m,) * layers)
    return MultiAssignInstance(layers, m, costs=arr, meta=dict(d.get("meta") or {}))
