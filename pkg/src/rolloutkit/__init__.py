"""Constrained rollout, auction assignment and enforced separation."""

from .auction import (
    AssignmentInstance,
    AuctionResult,
    asymmetric_solve,
    auction_scaled,
    auction_solve,
    bid,
    dual_value,
    verify_eps_cs,
)
from .discrete import (
    DiscreteOptSpec,
    FacilityInstance,
    TransportationSolution,
    facility_base_heuristic,
    facility_rollout,
    solve_transportation,
    wrap_discrete,
)
from .multiagent import multiagent_rollout, split_agents
from .multidim import (
    MultiAssignInstance,
    MultiAssignSolution,
    SeparationContext,
    enforced_separation_3d,
    enforced_separation_nd,
    rollout_3d,
    rollout_nd,
)
from .rollout import RolloutOutcome, fortified_rollout, rollout, tree_rollout
from .trajectory import (
    PolicyHeuristic,
    Problem,
    Trajectory,
    check_sequential_consistency,
    check_sequential_improvement,
    extend,
    join,
)

__version__ = "0.1.0"
