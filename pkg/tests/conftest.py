import pytest

from rolloutkit.trajectory import Problem, Trajectory


class TableHeuristic:
    """Completion looked up by the prefix of controls chosen so far."""

    def __init__(self, problem, table):
        self.problem = problem
        self.table = table

    def complete(self, y):
        tail = self.table.get(y.controls)
        if tail is None:
            return None
        states = [y.last]
        for u in tail:
            states.append(states[-1] + (u,))
        return Trajectory(tuple(states), tuple(tail))


def prefix_problem(horizon, costs, feasible_set=None, values=(0, 1)):
    """Tuple-state problem with a cost table on complete control tuples."""
    return Problem(
        horizon=horizon,
        initial_state=(),
        successor=lambda k, x, u: x + (u,),
        cost=lambda t: float(costs[t.controls]),
        candidates=lambda k, y: values,
        feasible=(lambda t: True) if feasible_set is None else (lambda t: t.controls in feasible_set),
    )


@pytest.fixture
def dead_end():
    """Rollout picks control 1 at stage 0, after which no candidate is feasible."""
    costs = {u: 9.0 for u in __import__("itertools").product((0, 1), repeat=3)}
    costs[(0, 0, 0)] = 5.0
    costs[(1, 0, 0)] = 4.0
    problem = prefix_problem(3, costs, {(0, 0, 0), (1, 0, 0)})
    table = {
        (): (0, 0, 0),
        (0,): (0, 0),
        (1,): (0, 0),
        (0, 0): (0,),
        (0, 1): (0,),
        (1, 0): (1,),
        (1, 1): (1,),
    }
    for u in costs:
        table[u] = ()
    return problem, TableHeuristic(problem, table)


@pytest.fixture
def runner_up():
    """The stage-0 runner-up leads to the optimum; plain rollout misses it."""
    costs = {(0, 0): 2.0, (1, 0): 3.0, (0, 1): 5.0, (1, 1): 0.0}
    problem = prefix_problem(2, costs)
    table = {(): (0, 0), (0,): (0,), (1,): (0,)}
    for u in costs:
        table[u] = ()
    return problem, TableHeuristic(problem, table)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
