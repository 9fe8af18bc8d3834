"""Unstructured discrete optimization as DP, and the facility-location example.

A problem over tuples ``u = (u_0, ..., u_{N-1})`` becomes a DP whose state
after ``k`` stages is simply the prefix ``(u_0, ..., u_{k-1})``; cost and
feasibility apply to the terminal tuple only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .auction import AssignmentInstance, asymmetric_solve, auction_scaled
from .errors import Infeasible, InfeasiblePlacement, SizeGuard
from .rollout import run_variant
from .trajectory import PolicyHeuristic, Problem, Trajectory

UNIT_BUDGET = 512


@dataclass(frozen=True, eq=False)
class DiscreteOptSpec:
    values: tuple  # per-position ordered candidate values
    cost: Callable[[tuple], float]
    feasible: Callable[[tuple], bool] = field(default=lambda u: True)
    name: str = "discrete"

    @property
    def n(self) -> int:
        return len(self.values)


def wrap_discrete(spec: DiscreteOptSpec) -> Problem:
    """DP whose stage-``k`` state is the tuple of the first ``k`` components."""
    values = tuple(tuple(v) for v in spec.values)
    return Problem(
        horizon=len(values),
        initial_state=(),
        successor=lambda k, x, u: x + (u,),
        cost=lambda t: spec.cost(t.last),
        candidates=lambda k, y: values[k],
        feasible=lambda t: spec.feasible(t.last),
        name=spec.name,
    )


@dataclass(frozen=True)
class FacilityInstance:
    demands: tuple
    capacities: tuple
    placement_costs: tuple
    service_costs: tuple  # M x N, client by location

    def __post_init__(self):
        d = tuple(int(x) for x in self.demands)
        c = tuple(int(x) for x in self.capacities)
        b = tuple(int(x) for x in self.placement_costs)
        a = tuple(tuple(int(x) for x in row) for row in self.service_costs)
        if not d or not c:
            raise ValueError("need at least one client and one location")
        if len(b) != len(c):
            raise ValueError("one placement cost per location")
        if len(a) != len(d) or any(len(row) != len(c) for row in a):
            raise ValueError("service cost matrix must be clients x locations")
        if min(d) < 0 or min(c) <= 0 or min(b) < 0 or min(min(r) for r in a) < 0:
            raise ValueError("demands, costs must be non-negative and capacities positive")
        for name, v in (("demands", d), ("capacities", c), ("placement_costs", b), ("service_costs", a)):
            object.__setattr__(self, name, v)

    @property
    def M(self) -> int:
        return len(self.demands)

    @property
    def N(self) -> int:
        return len(self.capacities)

    def open_capacity(self, placements) -> int:
        return sum(c for c, u in zip(self.capacities, placements) if u)

    def placement_cost(self, placements) -> int:
        return sum(b for b, u in zip(self.placement_costs, placements) if u)

    def to_json(self) -> dict:
        return {
            "demands": list(self.demands),
            "capacities": list(self.capacities),
            "placement_costs": list(self.placement_costs),
            "service_costs": [x for row in self.service_costs for x in row],
        }

    @classmethod
    def from_json(cls, d: dict) -> "FacilityInstance":
        n = len(d["capacities"])
        flat = d["service_costs"]
        m = len(d["demands"])
        if len(flat) != m * n:
            raise ValueError("service cost array does not match clients x locations")
        rows = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(m))
        return cls(tuple(d["demands"]), tuple(d["capacities"]), tuple(d["placement_costs"]), rows)


@dataclass(frozen=True)
class TransportationSolution:
    flows: tuple  # flows[i][k]
    cost: int

    def violations(self, instance: FacilityInstance, placements) -> list:
        """Human-readable list of violated flow constraints (empty if valid)."""
        out = []
        if len(self.flows) != instance.M or any(len(r) != instance.N for r in self.flows):
            return ["flow matrix has the wrong shape"]
        for i, row in enumerate(self.flows):
            if any(y < 0 for y in row):
                out.append(f"negative flow for client {i}")
            if sum(row) != instance.demands[i]:
                out.append(
                    f"flow conservation violated for client {i}: ships {sum(row)}, demand {instance.demands[i]}"
                )
        for k in range(instance.N):
            load = sum(row[k] for row in self.flows)
            cap = instance.capacities[k] if placements[k] else 0
            if load > cap:
                out.append(f"capacity exceeded at location {k}: load {load}, capacity {cap}")
        cost = sum(y * a for row, arow in zip(self.flows, instance.service_costs) for y, a in zip(row, arow))
        if cost != self.cost:
            out.append(f"stated service cost {self.cost} differs from recomputed {cost}")
        return out

    def to_json(self) -> dict:
        return {"flows": [list(r) for r in self.flows], "cost": self.cost}


def solve_transportation(instance: FacilityInstance, placements: Sequence[int]) -> TransportationSolution:
    """Optimal integer flows for fixed placements via unit splitting.

    Each client becomes ``d_i`` unit persons and each open location
    ``min(c_k, total demand)`` unit objects; the assignment is solved by
    auction on negated service costs and the unit matches are summed back.
    """
    placements = tuple(int(u) for u in placements)
    if len(placements) != instance.N:
        raise ValueError("one placement decision per location")
    total = sum(instance.demands)
    if total > instance.open_capacity(placements):
        raise InfeasiblePlacement(
            f"demand {total} exceeds open capacity {instance.open_capacity(placements)}"
        )
    if total > UNIT_BUDGET:
        raise SizeGuard(f"total demand {total} exceeds the unit-split budget {UNIT_BUDGET}")
    flows = [[0] * instance.N for _ in range(instance.M)]
    if total == 0:
        return TransportationSolution(tuple(map(tuple, flows)), 0)
    persons = [i for i in range(instance.M) for _ in range(instance.demands[i])]
    objects = [
        k for k in range(instance.N) if placements[k] for _ in range(min(instance.capacities[k], total))
    ]
    benefits = [[-instance.service_costs[i][k] for k in objects] for i in persons]
    inst = AssignmentInstance(benefits, trusted=True)
    res = asymmetric_solve(inst) if len(objects) > len(persons) else auction_scaled(inst)
    for p, o in enumerate(res.assignment):
        flows[persons[p]][objects[o]] += 1
    cost = -res.primal
    return TransportationSolution(tuple(map(tuple, flows)), cost)


def facility_base_heuristic(prefix: Sequence[int], instance: FacilityInstance):
    """Open every location not yet decided and solve the transportation problem.

    Returns ``(placements, transportation, total cost)``.
    """
    placements = tuple(prefix) + (1,) * (instance.N - len(prefix))
    if sum(instance.demands) > instance.open_capacity(placements):
        raise Infeasible("demand exceeds capacity even with every remaining location open")
    tr = solve_transportation(instance, placements)
    return placements, tr, instance.placement_cost(placements) + tr.cost


class _Evaluator:
    """Transportation solves behind cost and feasibility, with solve counting.

    With ``cache`` on, every placement is solved at most once.  With it off
    only the most recent placement is remembered, so each trial costs one
    solve.  Infeasible placements count as posed solves.
    """

    def __init__(self, instance: FacilityInstance, cache: bool):
        self.instance = instance
        self.cache = cache
        self.table: dict = {}
        self.last = None
        self.solves = 0
        self.log: list = []

    def __call__(self, placements: tuple) -> Optional[TransportationSolution]:
        if self.cache and placements in self.table:
            return self.table[placements]
        if self.last is not None and self.last[0] == placements:
            return self.last[1]
        self.solves += 1
        try:
            sol = solve_transportation(self.instance, placements)
        except InfeasiblePlacement:
            sol = None
        self.log.append((placements, sol))
        self.last = (placements, sol)
        if self.cache:
            self.table[placements] = sol
        return sol


def facility_problem(instance: FacilityInstance, evaluate: Callable) -> Problem:
    def cost(t: Trajectory):
        sol = evaluate(t.last)
        return instance.placement_cost(t.last) + sol.cost

    def feasible(t: Trajectory):
        return evaluate(t.last) is not None

    return Problem(
        horizon=instance.N,
        initial_state=(),
        successor=lambda k, x, u: x + (u,),
        cost=cost,
        candidates=lambda k, y: (0, 1),
        feasible=feasible,
        name="facility",
    )


def open_remaining(problem: Problem) -> PolicyHeuristic:
    """The all-open completion as a policy (so it is sequentially consistent)."""
    return PolicyHeuristic(problem, lambda k, y: 1)


@dataclass(frozen=True)
class FacilityResult:
    placements: tuple
    flows: tuple
    cost: int
    transport_solves: int  # during the rollout stages
    baseline_solves: int  # the up-front all-open evaluation
    baseline_cost: int
    heuristic_calls: int
    log: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "placements": list(self.placements),
            "flows": [list(r) for r in self.flows],
            "cost": self.cost,
            "transport_solves": self.transport_solves,
            "baseline_solves": self.baseline_solves,
            "baseline_cost": self.baseline_cost,
            "heuristic_calls": self.heuristic_calls,
        }


def facility_rollout(instance: FacilityInstance, cache: bool = True, variant: str = "fortified", budget=None) -> FacilityResult:
    """Decide locations ``0..N-1`` in order by rollout over the all-open heuristic."""
    evaluate = _Evaluator(instance, cache)
    all_open = (1,) * instance.N
    base = evaluate(all_open)
    if base is None:
        raise Infeasible("demand exceeds total capacity with every location open")
    baseline_solves = evaluate.solves
    problem = facility_problem(instance, evaluate)
    out = run_variant(problem, open_remaining(problem), variant, budget)
    placements = out.trajectory.last
    stage_solves = evaluate.solves - baseline_solves
    sol = dict(evaluate.log)[placements]
    return FacilityResult(
        placements=placements,
        flows=sol.flows,
        cost=int(out.cost),
        transport_solves=stage_solves,
        baseline_solves=baseline_solves,
        baseline_cost=int(out.baseline),
        heuristic_calls=out.heuristic_calls,
        log=tuple(evaluate.log),
    )

