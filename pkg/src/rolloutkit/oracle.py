"""Brute-force reference solvers.

Everything here is plain enumeration and shares no code with the solvers it
is used to check.  Inputs are raw data (matrices, tensors, vectors) or any
object exposing the same attributes.  Each call runs under an
:class:`OracleBudget`; the ``ROLLOUTKIT_BUDGET`` environment variable
overrides the default limit of one million enumerated items.
"""

from __future__ import annotations

import itertools
import os
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import BudgetExceeded, NoFeasible
from .trajectory import Trajectory

DEFAULT_BUDGET = 10**6


class OracleBudget:
    def __init__(self, limit: Optional[int] = None):
        if limit is None:
            limit = int(os.environ.get("ROLLOUTKIT_BUDGET", DEFAULT_BUDGET))
        self.limit = limit
        self.count = 0

    def tick(self, n: int = 1) -> None:
        self.count += n
        if self.count > self.limit:
            raise BudgetExceeded(f"oracle enumeration passed {self.limit} items")


def _budget(b) -> OracleBudget:
    return b if isinstance(b, OracleBudget) else OracleBudget(b)


def exact_dp(problem, budget=None):
    """Optimal feasible complete trajectory and its cost by depth-first search.

    Ties keep the first trajectory in candidate order.
    """
    b = _budget(budget)
    best = [None, None]
    n = problem.horizon

    def dfs(states, controls):
        k = len(controls)
        if k == n:
            b.tick()
            t = Trajectory(tuple(states), tuple(controls))
            if problem.feasible(t):
                c = problem.cost(t)
                if best[1] is None or c < best[1]:
                    best[0], best[1] = t, c
            return
        y = Trajectory(tuple(states), tuple(controls))
        for u in problem.candidates(k, y):
            dfs(states + [problem.successor(k, states[-1], u)], controls + [u])

    dfs([problem.initial_state], [])
    if best[0] is None:
        raise NoFeasible("no feasible complete trajectory")
    return best[0], best[1]


def exact_assignment_2d(benefits, mask=None, maximize: bool = True, budget=None):
    """Best value and assignment over all injections persons -> objects."""
    if hasattr(benefits, "benefits"):
        mask = benefits.mask if mask is None else mask
        benefits = benefits.benefits
    rows = [list(r) for r in benefits]
    n = len(rows)
    n_obj = len(rows[0]) if rows else 0
    allowed = set(map(tuple, mask)) if mask is not None else None
    b = _budget(budget)
    best_val, best_assign = None, None
    for perm in itertools.permutations(range(n_obj), n):
        b.tick()
        if allowed is not None and any((i, j) not in allowed for i, j in enumerate(perm)):
            continue
        val = sum(rows[i][j] for i, j in enumerate(perm))
        if best_val is None or (val > best_val if maximize else val < best_val):
            best_val, best_assign = val, perm
    if best_assign is None:
        raise NoFeasible("no assignment on the allowed pairs")
    return best_val, tuple(best_assign)


def _tensor_cost(costs):
    if callable(costs):
        return costs

    def lookup(t):
        v = costs
        for i in t:
            v = v[i]
        return int(v)

    return lookup


def exact_assignment_nd(costs, layers: int, m: int, budget=None):
    """Minimum-cost (layers)-dimensional assignment by enumerating one
    permutation per adjacent layer pair.

    ``costs`` is a nested sequence / array indexed by the full tuple, or a
    callable on tuples.  Groupings are returned ordered by first-layer node.
    """
    cost = _tensor_cost(costs)
    b = _budget(budget)
    perms = list(itertools.permutations(range(m)))
    best_val, best_groups = None, None
    for chain in itertools.product(perms, repeat=layers - 1):
        b.tick()
        groups = []
        for j in range(m):
            t = [j]
            for p in chain:
                t.append(p[t[-1]])
            groups.append(tuple(t))
        val = sum(cost(g) for g in groups)
        if best_val is None or val < best_val:
            best_val, best_groups = val, tuple(groups)
    return best_val, best_groups


def exact_assignment_3d(costs, m: Optional[int] = None, budget=None):
    if m is None:
        m = len(costs)
    return exact_assignment_nd(costs, 3, m, budget)


def _splits(total, caps):
    """All integer vectors x with sum(x) == total and 0 <= x <= caps."""
    if not caps:
        if total == 0:
            yield ()
        return
    head, rest = caps[0], caps[1:]
    for x in range(min(head, total), -1, -1):
        if total - x <= sum(rest):
            for tail in _splits(total - x, rest):
                yield (x,) + tail


def exact_transportation(demands, capacities, service_costs, budget=None):
    """Minimum service cost over integer flows meeting every demand within capacity.

    ``capacities`` are the effective capacities (zero for closed locations).
    Returns ``(cost, flows)`` with ``flows[i][k]``; raises NoFeasible if
    demand exceeds capacity.
    """
    d = [int(x) for x in demands]
    caps = [int(c) for c in capacities]
    a = [list(map(int, row)) for row in service_costs]
    if sum(d) > sum(caps):
        raise NoFeasible("demand exceeds capacity")
    b = _budget(budget)
    best = [None, None]

    def rec(i, left, acc, flows):
        if i == len(d):
            b.tick()
            if best[0] is None or acc < best[0]:
                best[0], best[1] = acc, tuple(flows)
            return
        for row in _splits(d[i], left):
            b.tick()
            c = acc + sum(x * a[i][k] for k, x in enumerate(row))
            rec(i + 1, [l - x for l, x in zip(left, row)], c, flows + [row])

    rec(0, caps, 0, [])
    if best[1] is None:
        raise NoFeasible("no integer flow meets the demands")
    return best[0], best[1]


def exact_facility(demands, capacities, placement_costs, service_costs, budget=None):
    """Cheapest placement vector (and its cost) over all ``2^N`` choices."""
    b = _budget(budget)
    n = len(capacities)
    best_val, best_u = None, None
    for u in itertools.product((0, 1), repeat=n):
        caps = [c if x else 0 for c, x in zip(capacities, u)]
        if sum(demands) > sum(caps):
            continue
        service, _ = exact_transportation(demands, caps, service_costs, b)
        val = service + sum(bk for bk, x in zip(placement_costs, u) if x)
        if best_val is None or val < best_val:
            best_val, best_u = val, u
    if best_u is None:
        raise NoFeasible("no placement covers the total demand")
    return best_u, best_val


def equilibrium_prices(benefits, budget=None):
    """An integer price vector making an optimal assignment fully happy.

    Searches prices in ``[0, 2C]`` per object (valid after shifting the
    cheapest price to zero).  Returns ``(assignment, prices)``.
    """
    rows = [list(r) for r in benefits]
    n = len(rows)
    c = max(abs(v) for r in rows for v in r)
    value, assign = exact_assignment_2d(rows, budget=budget)
    b = _budget(budget)
    for prices in itertools.product(range(0, 2 * c + 1), repeat=len(rows[0])):
        b.tick()
        if all(
            rows[i][assign[i]] - prices[assign[i]] >= max(rows[i][j] - prices[j] for j in range(len(prices)))
            for i in range(n)
        ):
            return assign, tuple(prices)
    raise NoFeasible("no equilibrium price vector in the searched range")


def dual_bound(benefits, prices) -> Fraction:
    """Assignment dual objective, recomputed independently."""
    ps = [Fraction(p) for p in prices]
    return sum(ps, Fraction(0)) + sum(
        max(Fraction(a) - p for a, p in zip(row, ps)) for row in benefits
    )


def enumerate_tuples(values: Sequence[Sequence], cost: Callable, feasible: Callable = lambda u: True, budget=None):
    """Direct minimum over the Cartesian product of per-position values."""
    b = _budget(budget)
    best_u, best_c = None, None
    for u in itertools.product(*values):
        b.tick()
        if not feasible(u):
            continue
        c = cost(u)
        if best_c is None or c < best_c:
            best_u, best_c = u, c
    if best_u is None:
        raise NoFeasible("constraint set is empty")
    return best_u, best_c
