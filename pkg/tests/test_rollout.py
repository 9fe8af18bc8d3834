import pytest
from hypothesis import given, settings, strategies as st

from rolloutkit.errors import DeadEnd, InfeasibleStart
from rolloutkit.instances import HashHeuristic, frugal_heuristic, gen_toy_dp
from rolloutkit.oracle import exact_dp
from rolloutkit.rollout import fortified_rollout, rollout, run_variant, tree_rollout
from rolloutkit.trajectory import PolicyHeuristic, Problem, first_candidate_heuristic


def single_path_problem():
    return Problem(
        horizon=3,
        initial_state=0,
        successor=lambda k, x, u: x + u,
        cost=lambda t: float(t.last),
        candidates=lambda k, y: (k + 1,),
    )


def test_single_candidate_gives_unique_trajectory():
    p = single_path_problem()
    out = rollout(p, first_candidate_heuristic(p))
    assert out.trajectory.states == (0, 1, 3, 6)
    assert out.chain == (6.0, 6.0, 6.0)


def test_seeded_toy_improves_on_baseline():
    toy = gen_toy_dp(11, horizon=4, controls=2)
    p = toy.problem()
    out = rollout(p, frugal_heuristic(p, toy))
    _, best = exact_dp(p)
    chain = (out.baseline,) + out.chain
    assert all(a >= b for a, b in zip(chain, chain[1:]))
    assert best <= out.cost <= out.baseline
    assert out.chain[-1] == out.cost


def test_plain_rollout_dead_end(dead_end):
    p, h = dead_end
    with pytest.raises(DeadEnd) as err:
        rollout(p, h)
    assert err.value.stage == 1


def test_fortified_survives_dead_end(dead_end):
    p, h = dead_end
    out = fortified_rollout(p, h)
    assert out.trajectory.controls == (1, 0, 0)
    assert out.cost == 4.0 <= out.baseline == 5.0
    assert [r.case for r in out.trace] == ["argmin", "follow-best", "argmin"]


def test_infeasible_start():
    p = Problem(2, (), lambda k, x, u: x + (u,), lambda t: 0.0,
                candidates=lambda k, y: (0, 1), feasible=lambda t: t.controls != (0, 0))
    h = first_candidate_heuristic(p)
    for fn in (rollout, fortified_rollout):
        with pytest.raises(InfeasibleStart):
            fn(p, h)
    with pytest.raises(InfeasibleStart):
        tree_rollout(p, h, 3)


def test_fortified_keeps_baseline_when_nothing_beats_it():
    # every deviation completes to something worse than the baseline
    costs = {(0, 0, 0): 1.0}
    p = Problem(3, (), lambda k, x, u: x + (u,), lambda t: costs.get(t.controls, 10.0),
                candidates=lambda k, y: (1, 0))
    out = fortified_rollout(p, PolicyHeuristic(p, lambda k, y: 0))
    assert out.trajectory == out.baseline_trajectory
    assert out.cost == 1.0


def test_tree_beats_rollout_on_runner_up(runner_up):
    p, h = runner_up
    assert rollout(p, h).cost == 2.0
    out = tree_rollout(p, h, 2 * p.horizon)
    assert out.cost == 0.0 == exact_dp(p)[1]


def test_tree_full_budget_reaches_optimum():
    for seed in range(10):
        toy = gen_toy_dp(seed, horizon=4, controls=2)
        p = toy.problem()
        out = tree_rollout(p, frugal_heuristic(p, toy), 100)
        assert out.cost == exact_dp(p)[1]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 3), st.booleans())
def test_tree_with_budget_n_is_fortified(seed, horizon, controls, hashed):
    toy = gen_toy_dp(seed, horizon=horizon, controls=controls)
    p = toy.problem()
    h = HashHeuristic(p, controls, seed) if hashed else frugal_heuristic(p, toy)
    try:
        f = fortified_rollout(p, h)
    except InfeasibleStart:
        return
    t = tree_rollout(p, h, p.horizon)
    assert t == f


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 3))
def test_fortified_never_worse_than_baseline(seed, horizon, controls):
    toy = gen_toy_dp(seed, horizon=horizon, controls=controls)
    p = toy.problem()
    h = HashHeuristic(p, controls, seed)
    try:
        out = fortified_rollout(p, h)
    except InfeasibleStart:
        return
    assert out.cost <= out.baseline
    assert p.feasible(out.trajectory)
    assert out.cost == p.cost(out.trajectory)


def test_calls_per_stage_equal_candidate_count():
    toy = gen_toy_dp(5, horizon=5, controls=3)
    p = toy.problem()
    out = rollout(p, frugal_heuristic(p, toy))
    for rec in out.trace:
        assert rec.calls == len(rec.tried) == 3
    assert out.heuristic_calls == 1 + 5 * 3


def test_run_variant_dispatch():
    toy = gen_toy_dp(2)
    p = toy.problem()
    h = frugal_heuristic(p, toy)
    assert run_variant(p, h, "plain").trajectory == rollout(p, h).trajectory
    assert run_variant(p, h, "tree") == fortified_rollout(p, h)
    with pytest.raises(ValueError):
        run_variant(p, h, "bogus")
    with pytest.raises(ValueError):
        tree_rollout(p, h, 0)
