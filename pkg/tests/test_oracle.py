import itertools

import pytest

from rolloutkit.errors import BudgetExceeded, NoFeasible
from rolloutkit.oracle import (
    OracleBudget,
    dual_bound,
    enumerate_tuples,
    equilibrium_prices,
    exact_assignment_2d,
    exact_assignment_3d,
    exact_assignment_nd,
    exact_dp,
    exact_facility,
    exact_transportation,
)
from rolloutkit.trajectory import Problem


def toy4():
    # additive weights plus a bonus for repeating the previous bit
    w = [[3, 1], [2, 4], [1, 1], [5, 0]]

    def cost(t):
        u = t.controls
        return float(sum(w[k][b] for k, b in enumerate(u)) - 2 * sum(a == b for a, b in zip(u, u[1:])))

    return Problem(4, (), lambda k, x, u: x + (u,), cost, candidates=lambda k, y: (0, 1)), w


def test_exact_dp_hand_table():
    p, w = toy4()
    table = {}
    for u in itertools.product((0, 1), repeat=4):
        table[u] = sum(w[k][b] for k, b in enumerate(u)) - 2 * sum(a == b for a, b in zip(u, u[1:]))
    best = min(table.values())
    t, c = exact_dp(p)
    # (1,1,1,1): weights 1+4+1+0, three repeats worth -6
    assert c == best == 0
    assert t.controls == (1, 1, 1, 1)


def test_exact_dp_single_path():
    p = Problem(3, 0, lambda k, x, u: x + u, lambda t: float(t.last), candidates=lambda k, y: (1,))
    t, c = exact_dp(p)
    assert t.states == (0, 1, 2, 3)


def test_exact_dp_no_feasible():
    p = Problem(2, 0, lambda k, x, u: x, lambda t: 0.0, candidates=lambda k, y: (0, 1), feasible=lambda t: False)
    with pytest.raises(NoFeasible):
        exact_dp(p)


def test_budget_limits():
    p = Problem(10, 0, lambda k, x, u: x, lambda t: 0.0, candidates=lambda k, y: (0, 1))
    with pytest.raises(BudgetExceeded):
        exact_dp(p, budget=100)


def test_budget_env_override(monkeypatch):
    monkeypatch.setenv("ROLLOUTKIT_BUDGET", "5")
    assert OracleBudget().limit == 5
    with pytest.raises(BudgetExceeded):
        exact_assignment_2d([[1, 2, 3]] * 3)


def test_assignment_2d_basics():
    assert exact_assignment_2d([[4]]) == (4, (0,))
    assert exact_assignment_2d([[10 * (i == j) for j in range(3)] for i in range(3)]) == (30, (0, 1, 2))
    assert exact_assignment_2d([[5, 1], [1, 5]], maximize=False) == (2, (1, 0))
    assert exact_assignment_2d([[1, 7, 2]]) == (7, (1,))


def test_assignment_3d_basics():
    assert exact_assignment_3d([[[6]]])[0] == 6
    beta = [[1, 5], [4, 2]]
    gamma = [[3, 0], [1, 6]]
    tensor = [[[beta[j][l] + gamma[l][w] for w in range(2)] for l in range(2)] for j in range(2)]
    # beta optimum 3 (diagonal), gamma optimum 1 (anti-diagonal)
    assert exact_assignment_3d(tensor)[0] == 4


def test_assignment_nd_callable():
    val, groups = exact_assignment_nd(lambda t: sum(t), 4, 2)
    assert val == 4 and len(groups) == 2


def test_transportation_enumeration():
    assert exact_transportation([3], [5], [[2]]) == (6, ((3,),))
    assert exact_transportation([], [1], []) == (0, ())
    with pytest.raises(NoFeasible):
        exact_transportation([3], [2], [[1]])
    cost, flows = exact_transportation([2, 2], [3, 1], [[1, 5], [1, 2]])
    assert cost == 1 * 2 + 1 * 1 + 2 * 1


def test_facility_enumeration():
    assert exact_facility([0, 0], [3, 3], [4, 5], [[1, 1], [1, 1]]) == ((0, 0), 0)
    assert exact_facility([2], [3], [7], [[1]]) == ((1,), 9)
    with pytest.raises(NoFeasible):
        exact_facility([4], [3], [0], [[0]])


def test_equilibrium_prices_make_everyone_happy():
    a = [[5, 1, 3], [2, 6, 0], [4, 4, 7]]
    assign, prices = equilibrium_prices(a)
    for i, j in enumerate(assign):
        assert a[i][j] - prices[j] == max(a[i][k] - prices[k] for k in range(3))
    assert dual_bound(a, prices) == exact_assignment_2d(a)[0]


def test_enumerate_tuples_empty():
    with pytest.raises(NoFeasible):
        enumerate_tuples([(0, 1)], lambda u: 0, lambda u: False)
