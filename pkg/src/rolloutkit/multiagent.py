"""One-agent-at-a-time reformulation of multiagent problems.

Stage ``k`` of an ``m``-agent problem becomes ``m`` decision slots.  The
state at slot ``k*m + l`` is ``(x_k, (u^1, ..., u^l))``: the real state plus
the components chosen so far.  Choosing the last component applies the real
system equation.  Costs and feasibility are evaluated on the original
problem after mapping complete trajectories back.
"""

from __future__ import annotations

from dataclasses import replace

from .errors import IncompleteHeuristic, LengthError, NotDecomposed
from .rollout import RolloutOutcome, fortified_rollout, rollout
from .trajectory import Problem, Trajectory


class AgentSplitProblem(Problem):
    """A :class:`Problem` over ``N*m`` slots wrapping a multiagent problem."""

    def __init__(self, original: Problem):
        if not original.decomposed:
            raise NotDecomposed(f"{original.name} declares no agent components")
        m = original.agents
        object.__setattr__(self, "original", original)
        object.__setattr__(self, "m", m)

        def successor(s, state, c):
            k = s // m
            x, chosen = state
            chosen = chosen + (c,)
            if len(chosen) < m:
                return (x, chosen)
            return (original.successor(k, x, chosen), ())

        def candidates(s, y):
            k, l = divmod(s, m)
            return list(original.component_candidates(k, self.stage_prefix(y), l))

        super().__init__(
            horizon=original.horizon * m,
            initial_state=(original.initial_state, ()),
            successor=successor,
            cost=lambda t: original.cost(self.to_original(t)),
            candidates=candidates,
            feasible=lambda t: original.feasible(self.to_original(t)),
            name=f"{original.name}/split",
        )

    def slot(self, s: int) -> tuple[int, int]:
        return divmod(s, self.m)

    def stage_prefix(self, y: Trajectory) -> Trajectory:
        """Original partial trajectory up to the last full stage of ``y``."""
        k = y.length // self.m
        states = tuple(y.states[i * self.m][0] for i in range(k + 1))
        controls = tuple(
            tuple(y.controls[i * self.m:(i + 1) * self.m]) for i in range(k)
        )
        return Trajectory(states, controls)

    def to_original(self, y: Trajectory) -> Trajectory:
        if y.length % self.m:
            raise LengthError("split trajectory ends mid-stage")
        return self.stage_prefix(y)

    def to_split(self, t: Trajectory) -> Trajectory:
        """Split form of an original (partial or tail) trajectory."""
        states = [(t.states[0], ())]
        controls = []
        for i, u in enumerate(t.controls):
            for l, c in enumerate(u):
                controls.append(c)
                if l + 1 < self.m:
                    states.append((t.states[i], tuple(u[: l + 1])))
                else:
                    states.append((t.states[i + 1], ()))
        return Trajectory(tuple(states), tuple(controls))


class _SplitHeuristic:
    def __init__(self, split: AgentSplitProblem, h):
        self.split = split
        self.h = h

    def complete(self, y: Trajectory):
        x, chosen = y.last
        y_k = self.split.stage_prefix(y)
        tail = self.h.complete_stage(y_k, chosen)
        if tail is None:
            return None
        if tail.controls and tuple(tail.controls[0][: len(chosen)]) != chosen:
            raise IncompleteHeuristic("completion does not keep the components already chosen")
        full = self.split.to_split(tail)
        # drop the components that were already fixed in y
        drop = len(chosen)
        return Trajectory(full.states[drop:], full.controls[drop:])


def split_agents(problem: Problem) -> AgentSplitProblem:
    return AgentSplitProblem(problem)


def multiagent_rollout(problem: Problem, h, variant: str = "plain") -> RolloutOutcome:
    """Rollout over the agent-split problem, reported in original form.

    ``h`` must provide ``complete_stage(y_k, chosen)``, completing a partial
    trajectory whose stage-``k`` control is only partly chosen.
    """
    split = split_agents(problem)
    if not callable(getattr(h, "complete_stage", None)):
        raise IncompleteHeuristic("base heuristic cannot resume from a partially chosen control")
    sh = _SplitHeuristic(split, h)
    if variant == "plain":
        out = rollout(split, sh)
    elif variant == "fortified":
        out = fortified_rollout(split, sh)
    else:
        raise ValueError(f"unknown multiagent variant {variant!r}")
    trace = tuple(
        replace(rec, stage=rec.stage // split.m, agent=rec.stage % split.m) for rec in out.trace
    )
    return RolloutOutcome(
        split.to_original(out.trajectory),
        out.cost,
        out.chain,
        out.heuristic_calls,
        split.to_original(out.baseline_trajectory),
        out.baseline,
        trace,
    )
