import itertools

import pytest
from hypothesis import given, settings, strategies as st

from rolloutkit.errors import InvalidControl, LengthError, Mismatch, StageOverflow
from rolloutkit.instances import ShiftHeuristic, frugal_heuristic, gen_toy_dp, greedy_heuristic
from rolloutkit.trajectory import (
    PolicyHeuristic,
    Problem,
    Trajectory,
    check_sequential_consistency,
    check_sequential_improvement,
    complete_with,
    extend,
    first_candidate_heuristic,
    join,
    random_probes,
)


def hand_problem():
    # x_{k+1} = 2 x_k + u + k, cost = sum of visited states
    return Problem(
        horizon=3,
        initial_state=1,
        successor=lambda k, x, u: 2 * x + u + k,
        cost=lambda t: float(sum(t.states)),
        candidates=lambda k, y: (0, 1),
    )


def test_extend_once():
    p = hand_problem()
    y = extend(p.start(), 1, p)
    assert y == Trajectory((1, 3), (1,))
    assert y.length == 1


def test_extend_at_horizon_overflows():
    p = hand_problem()
    y = p.start()
    for u in (0, 0, 0):
        y = extend(y, u, p)
    with pytest.raises(StageOverflow):
        extend(y, 0, p)


def test_extend_rejects_unknown_control():
    p = hand_problem()
    with pytest.raises(InvalidControl):
        extend(p.start(), 7, p)


def test_extend_chain_matches_hand_table():
    # unrolled by hand: 1 -(1)-> 3 -(0)-> 7 -(1)-> 17
    p = hand_problem()
    y = p.start()
    for u in (1, 0, 1):
        y = extend(y, u, p)
    assert y.states == (1, 3, 7, 17)
    assert y.controls == (1, 0, 1)


def test_extend_leaves_input_untouched():
    p = hand_problem()
    y0 = p.start()
    extend(y0, 1, p)
    assert y0 == Trajectory((1,), ())


def test_join_from_start_returns_completion():
    p = hand_problem()
    h = first_candidate_heuristic(p)
    tail = h.complete(p.start())
    assert join(p.start(), tail, p) == tail


def test_join_wrong_start_state():
    p = hand_problem()
    with pytest.raises(Mismatch):
        join(p.start(), Trajectory((5, 10, 21, 44), (0, 0, 0)), p)


def test_join_wrong_length():
    p = hand_problem()
    with pytest.raises(LengthError):
        join(p.start(), Trajectory((1, 2), (0,)), p)


def test_join_rejects_broken_successor():
    p = hand_problem()
    with pytest.raises(Mismatch):
        join(p.start(), Trajectory((1, 2, 99, 200), (0, 0, 0)), p)


def test_join_cost_matches_hand_evaluation():
    # y_1 = (1, u=1, 3), completion with controls (0, 0): states 3 -> 7 -> 16
    p = hand_problem()
    y1 = extend(p.start(), 1, p)
    t = join(y1, Trajectory((3, 7, 16), (0, 0)), p)
    assert p.cost(t) == 1 + 3 + 7 + 16


def test_trajectory_length_check():
    with pytest.raises(LengthError):
        Trajectory((1, 2), ())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.integers(0, 2), min_size=0, max_size=6))
def test_rebuild_by_extend_reproduces(seed, picks):
    toy = gen_toy_dp(seed, horizon=6, controls=3)
    p = toy.problem()
    y = p.start()
    for u in picks:
        y = extend(y, u, p)
    z = p.start()
    for u in y.controls:
        z = extend(z, u, p)
    assert z == y


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 4))
def test_join_is_complete_or_raises(seed, k):
    toy = gen_toy_dp(seed, horizon=4, controls=2)
    p = toy.problem()
    h = greedy_heuristic(p, toy)
    y = p.start()
    for _ in range(k):
        y = extend(y, 0, p)
    t = complete_with(p, h, y)
    assert t.length == p.horizon


def test_policy_is_consistent_on_random_probes():
    for seed in range(5):
        toy = gen_toy_dp(seed, horizon=5, controls=3)
        p = toy.problem()
        for h in (greedy_heuristic(p, toy), frugal_heuristic(p, toy), first_candidate_heuristic(p)):
            rep = check_sequential_consistency(h, p, random_probes(p, h, 100, seed))
            assert rep.ok
            assert rep.checked > 0


def test_horizon_one_is_vacuously_consistent():
    toy = gen_toy_dp(3, horizon=1, controls=3)
    p = toy.problem()
    h = ShiftHeuristic(p, 3)
    rep = check_sequential_consistency(h, p, random_probes(p, h, 20, 0))
    assert rep.ok and rep.checked == 0


def test_shift_heuristic_is_caught():
    toy = gen_toy_dp(1, horizon=4, controls=2)
    p = toy.problem()
    h = ShiftHeuristic(p, 2)
    rep = check_sequential_consistency(h, p, [p.start()])
    assert not rep.ok
    # replay the violation directly
    tail = h.complete(p.start())
    resumed = h.complete(extend(p.start(), tail.controls[0], p))
    assert resumed != tail.suffix(1)


def test_consistent_heuristic_is_improving():
    for seed in range(5):
        toy = gen_toy_dp(seed, horizon=5, controls=3)
        p = toy.problem()
        h = frugal_heuristic(p, toy)
        rep = check_sequential_improvement(h, p, random_probes(p, h, 100, seed))
        assert rep.ok


def test_improvement_check_skips_infeasible_probe():
    costs = {u: 1.0 for u in itertools.product((0, 1), repeat=2)}
    p = Problem(2, (), lambda k, x, u: x + (u,), lambda t: costs[t.controls],
                candidates=lambda k, y: (0, 1), feasible=lambda t: t.controls != (0, 0))
    h = first_candidate_heuristic(p)
    rep = check_sequential_improvement(h, p, [p.start()])
    assert rep.not_applicable == [p.start()]
    assert rep.checked == 0


def test_improvement_check_flags_dead_end(dead_end):
    p, h = dead_end
    y1 = extend(p.start(), 1, p)
    rep = check_sequential_improvement(h, p, [p.start(), y1])
    assert [f.probe for f in rep.violations] == [y1]
    # confirm by enumerating the candidates at y1
    for u in p.controls(1, y1):
        t = complete_with(p, h, extend(y1, u, p))
        assert not p.feasible(t)


def test_failed_completion_is_recorded():
    p = hand_problem()
    h = PolicyHeuristic(p, lambda k, y: None)
    rep = check_sequential_consistency(h, p, [p.start()])
    assert len(rep.failures) == 1
