"""Seeded instance generators and small DP test problems.

Every generator draws from the ``INSTANCE`` stream of :mod:`rolloutkit.rng`
so the same seed always produces bit-identical data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .auction import AssignmentInstance
from .discrete import FacilityInstance
from .errors import BadParams
from .multidim import MultiAssignInstance
from .trajectory import AgentPolicyHeuristic, PolicyHeuristic, Problem, Trajectory, extend


def _gen(seed: int, tag: int):
    return _rng.stream(seed, _rng.INSTANCE, tag)


def gen_assign2d(n: int, seed: int, n_obj: int | None = None, cmax: int = 100) -> AssignmentInstance:
    if n < 1 or (n_obj is not None and n_obj < n) or cmax < 0:
        raise BadParams("need n >= 1, n_obj >= n and cmax >= 0")
    g = _gen(seed, 1)
    a = g.integers(-cmax, cmax + 1, size=(n, n_obj or n))
    return AssignmentInstance(a.tolist())


def gen_assign3d(m: int, seed: int, cmax: int = 100) -> MultiAssignInstance:
    return gen_assignnd(3, m, seed, cmax)


def gen_assignnd(layers: int, m: int, seed: int, cmax: int = 100) -> MultiAssignInstance:
    if layers < 3 or m < 1 or cmax < 0:
        raise BadParams("need layers >= 3, m >= 1 and cmax >= 0")
    g = _gen(seed, 2)
    arr = g.integers(0, cmax + 1, size=(m,) * layers)
    return MultiAssignInstance.dense(arr, {"seed": seed})


def gen_separable(layers: int, m: int, seed: int, eps: int = 0, cmax: int = 50) -> MultiAssignInstance:
    """Sum of pairwise tables along the chain, plus integer noise in ``[-eps, eps]``.

    The tables and ``eps`` are kept in ``meta`` for bound checks.
    """
    if layers < 3 or m < 1 or eps < 0:
        raise BadParams("need layers >= 3, m >= 1 and eps >= 0")
    g = _gen(seed, 3)
    tables = [g.integers(0, cmax + 1, size=(m, m)) for _ in range(layers - 1)]
    arr = np.zeros((m,) * layers, dtype=np.int64)
    for p, t in enumerate(tables):
        shape = [1] * layers
        shape[p], shape[p + 1] = m, m
        arr = arr + t.reshape(shape)
    if eps:
        arr = arr + g.integers(-eps, eps + 1, size=arr.shape)
    meta = {"seed": seed, "eps": eps, "tables": [t.tolist() for t in tables]}
    return MultiAssignInstance.dense(arr, meta)


def gen_separable3d(m: int, seed: int, cmax: int = 50) -> MultiAssignInstance:
    return gen_separable(3, m, seed, 0, cmax)


def gen_eps_separable3d(m: int, eps: int, seed: int, cmax: int = 50) -> MultiAssignInstance:
    return gen_separable(3, m, seed, eps, cmax)


def gen_facility(M: int, N: int, seed: int, dmax: int = 5, cmax: int = 8, bmax: int = 20, amax: int = 10) -> FacilityInstance:
    """Random facility instance, resampled until opening everything is feasible."""
    if M < 1 or N < 1 or dmax < 1 or cmax < 1:
        raise BadParams("need M, N, dmax, cmax >= 1")
    g = _gen(seed, 4)
    for _ in range(1000):
        d = g.integers(1, dmax + 1, size=M)
        c = g.integers(1, cmax + 1, size=N)
        if d.sum() <= c.sum():
            break
    else:
        raise BadParams("could not draw a feasible facility instance")
    b = g.integers(0, bmax + 1, size=N)
    a = g.integers(0, amax + 1, size=(M, N))
    return FacilityInstance(tuple(d.tolist()), tuple(c.tolist()), tuple(b.tolist()), tuple(map(tuple, a.tolist())))


# ---------------------------------------------------------------------------
# toy DP problems


@dataclass(frozen=True)
class ToyDP:
    """Table-driven DP: transitions, stage costs and a resource cap.

    A trajectory is feasible when its summed resource use stays within
    ``limit``; the cost is the summed stage cost.
    """

    horizon: int
    states: int
    controls: int
    trans: tuple  # [k][x][u] -> next state
    stage_cost: tuple  # [k][x][u] -> int
    resource: tuple  # [k][x][u] -> int
    limit: int

    def usage(self, t: Trajectory) -> int:
        return sum(self.resource[k][x][u] for k, (x, u) in enumerate(zip(t.states, t.controls)))

    def problem(self) -> Problem:
        def cost(t):
            return float(sum(self.stage_cost[k][x][u] for k, (x, u) in enumerate(zip(t.states, t.controls))))

        return Problem(
            horizon=self.horizon,
            initial_state=0,
            successor=lambda k, x, u: self.trans[k][x][u],
            cost=cost,
            candidates=lambda k, y: tuple(range(self.controls)),
            feasible=lambda t: self.usage(t) <= self.limit,
            name="toy-dp",
        )

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "states": self.states,
            "controls": self.controls,
            "trans": np.asarray(self.trans).reshape(-1).tolist(),
            "stage_cost": np.asarray(self.stage_cost).reshape(-1).tolist(),
            "resource": np.asarray(self.resource).reshape(-1).tolist(),
            "limit": self.limit,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ToyDP":
        shape = (int(d["horizon"]), int(d["states"]), int(d["controls"]))

        def table(key):
            arr = np.asarray(d[key], dtype=np.int64)
            if arr.size != shape[0] * shape[1] * shape[2]:
                raise ValueError(f"{key} has the wrong length")
            return _freeze(arr.reshape(shape))

        return cls(*shape, table("trans"), table("stage_cost"), table("resource"), int(d["limit"]))


def _freeze(arr) -> tuple:
    return tuple(tuple(tuple(int(v) for v in row) for row in mat) for mat in arr)


def greedy_heuristic(problem: Problem, toy: ToyDP) -> PolicyHeuristic:
    """Cheapest stage cost first; a feedback policy, hence sequentially consistent."""

    def policy(k, y):
        x = y.last
        return min(range(toy.controls), key=lambda u: (toy.stage_cost[k][x][u], u))

    return PolicyHeuristic(problem, policy)


def frugal_heuristic(problem: Problem, toy: ToyDP) -> PolicyHeuristic:
    """Least resource first, then cheapest."""

    def policy(k, y):
        x = y.last
        return min(range(toy.controls), key=lambda u: (toy.resource[k][x][u], toy.stage_cost[k][x][u], u))

    return PolicyHeuristic(problem, policy)


def gen_toy_dp(seed: int, horizon: int = 4, controls: int = 2, states: int = 5, slack: int | None = None) -> ToyDP:
    """Random toy DP whose frugal completion from the start is feasible."""
    if horizon < 1 or controls < 1 or states < 1:
        raise BadParams("need positive horizon, controls and states")
    g = _gen(seed, 5)
    shape = (horizon, states, controls)
    trans = _freeze(g.integers(0, states, size=shape))
    cost = _freeze(g.integers(0, 10, size=shape))
    res = _freeze(g.integers(0, 4, size=shape))
    draft = ToyDP(horizon, states, controls, trans, cost, res, 0)
    p = draft.problem()
    base = frugal_heuristic(p, draft).complete(p.start())
    floor = draft.usage(base)
    extra = int(g.integers(0, 2 * horizon + 1)) if slack is None else slack
    return ToyDP(horizon, states, controls, trans, cost, res, floor + extra)


class ShiftHeuristic:
    """Plays controls ``(k + t) mod c`` from stage ``k``: it depends on where it
    was started, so resuming one step in gives a different tail."""

    def __init__(self, problem: Problem, controls: int):
        self.problem = problem
        self.controls = controls

    def complete(self, y: Trajectory):
        start = y.length
        cur = y
        while cur.length < self.problem.horizon:
            cur = extend(cur, (start + cur.length) % self.controls, self.problem)
        return cur.suffix(start)


class HashHeuristic:
    """Controls drawn from a hash of the whole partial trajectory.  Pure, but in
    general neither consistent nor improving."""

    def __init__(self, problem: Problem, controls: int, salt: int = 0):
        self.problem = problem
        self.controls = controls
        self.salt = salt

    def complete(self, y: Trajectory):
        cur = y
        key = hash((self.salt, y.controls)) & 0xFFFFFFFF
        gen = np.random.Generator(np.random.Philox(key))
        while cur.length < self.problem.horizon:
            cur = extend(cur, int(gen.integers(0, self.controls)), self.problem)
        return cur.suffix(y.length)


# ---------------------------------------------------------------------------
# multiagent toy


@dataclass(frozen=True)
class AgentToy:
    """``m`` agents on a ring of ``size`` cells, ``n`` moves each per stage."""

    horizon: int
    agents: int
    moves: int
    size: int
    target: tuple
    collide_cost: int
    limit: int | None = None  # max number of stages with any agent at cell 0
    # agents start on cells 1..m, so staying put never touches cell 0

    def problem(self) -> Problem:
        m, size = self.agents, self.size
        steps = tuple(range(self.moves))

        def successor(k, x, u):
            return tuple((xi + ui) % size for xi, ui in zip(x, u))

        def cost(t):
            total = 0
            for x in t.states[1:]:
                total += sum(abs(xi - ti) for xi, ti in zip(x, self.target))
                total += self.collide_cost * (m - len(set(x)))
            return float(total)

        def feasible(t):
            if self.limit is None:
                return True
            return sum(1 for x in t.states[1:] if 0 in x) <= self.limit

        return Problem(
            horizon=self.horizon,
            initial_state=tuple(range(1, m + 1)),
            successor=successor,
            cost=cost,
            feasible=feasible,
            agents=m,
            component_candidates=lambda k, y, l: steps,
            name="agent-toy",
        )


def gen_agent_toy(seed: int, agents: int, moves: int, horizon: int = 2, size: int = 6, constrained: bool = False) -> AgentToy:
    if size < agents + 2:
        raise BadParams("ring needs at least agents + 2 cells")
    g = _gen(seed, 6)
    target = tuple(int(v) for v in g.integers(0, size, size=agents))
    limit = horizon if not constrained else int(g.integers(1, horizon + 1))
    return AgentToy(horizon, agents, moves, size, target, int(g.integers(0, 5)), limit if constrained else None)


def stay_heuristic(problem: Problem) -> AgentPolicyHeuristic:
    """Every agent plays move 0 (stays put when moves start at 0)."""
    return AgentPolicyHeuristic(problem, lambda k, y, chosen: 0)
