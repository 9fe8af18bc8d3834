"""Forward auction algorithm for 2-dimensional assignment.

Benefits are integers and are maximized.  Internally every run works on
benefits multiplied by an integer ``scale`` so that prices and epsilon stay
exact integers; with ``scale = n + 1`` an epsilon of one scaled unit is
``1/(n+1) < 1/n`` in original units, which makes the final assignment
optimal.  Prices in :class:`AuctionResult` are kept in scaled units together
with the scale factor.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

from .errors import Infeasible, IsolatedPerson, PriceInitError


@dataclass(frozen=True)
class AssignmentInstance:
    """``n`` persons, ``n_obj >= n`` objects, integer benefits ``a[i][j]``.

    ``mask`` restricts the allowed person/object pairs; None allows all.
    Unless ``trusted`` is set, construction checks that every person can be
    assigned simultaneously and raises :class:`Infeasible` otherwise.
    """

    benefits: tuple
    mask: Optional[frozenset] = None
    trusted: bool = field(default=False, compare=False)

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.benefits)
        if not rows:
            raise ValueError("instance needs at least one person")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("benefit matrix is ragged")
        if width < len(rows):
            raise ValueError("need at least as many objects as persons")
        object.__setattr__(self, "benefits", rows)
        if self.mask is not None:
            mask = frozenset((int(i), int(j)) for i, j in self.mask)
            for i, j in mask:
                if not (0 <= i < len(rows) and 0 <= j < width):
                    raise ValueError(f"mask pair {(i, j)} out of range")
            object.__setattr__(self, "mask", mask)
        if not self.trusted and self.mask is not None and not _matchable(self.allowed, width):
            raise Infeasible("no assignment covers every person on the allowed pairs")

    @classmethod
    def from_costs(cls, costs, mask=None, trusted=False) -> "AssignmentInstance":
        """Cost-minimization instance, stored with negated benefits."""
        return cls(tuple(tuple(-int(c) for c in row) for row in costs), mask, trusted)

    @property
    def n(self) -> int:
        return len(self.benefits)

    @property
    def n_obj(self) -> int:
        return len(self.benefits[0])

    @cached_property
    def allowed(self) -> tuple:
        if self.mask is None:
            return tuple(tuple(range(self.n_obj)) for _ in range(self.n))
        return tuple(
            tuple(j for j in range(self.n_obj) if (i, j) in self.mask) for i in range(self.n)
        )

    @cached_property
    def C(self) -> int:
        return max(
            (abs(self.benefits[i][j]) for i in range(self.n) for j in self.allowed[i]),
            default=0,
        )

    def value(self, assignment: Sequence[int]) -> int:
        return sum(self.benefits[i][j] for i, j in enumerate(assignment))


def _matchable(allowed, n_obj) -> bool:
    owner = [-1] * n_obj

    def augment(i, seen):
        for j in allowed[i]:
            if j in seen:
                continue
            seen.add(j)
            if owner[j] < 0 or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    return all(augment(i, set()) for i in range(len(allowed)))


@dataclass(frozen=True)
class PassRecord:
    """One auction pass, all figures in scaled units."""

    epsilon: int
    rounds: int
    primal: int
    dual: int


@dataclass(frozen=True)
class AuctionResult:
    assignment: tuple
    prices: tuple  # scaled integers
    scale: int
    epsilon: Fraction  # original units
    rounds: int
    primal: int
    dual: Fraction
    passes: tuple = ()

    @property
    def price_values(self) -> tuple:
        return tuple(Fraction(p, self.scale) for p in self.prices)

    @property
    def epsilon_scaled(self) -> Fraction:
        return self.epsilon * self.scale

    def to_json(self) -> dict:
        return {
            "assignment": list(self.assignment),
            "prices": list(self.prices),
            "scale": self.scale,
            "epsilon": str(self.epsilon),
            "rounds": self.rounds,
            "primal": self.primal,
            "dual": str(self.dual),
            "passes": [
                {"epsilon": p.epsilon, "rounds": p.rounds, "primal": p.primal, "dual": p.dual}
                for p in self.passes
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "AuctionResult":
        return cls(
            tuple(d["assignment"]),
            tuple(d["prices"]),
            int(d["scale"]),
            Fraction(d["epsilon"]),
            int(d.get("rounds", 0)),
            int(d["primal"]),
            Fraction(d["dual"]),
            tuple(PassRecord(**p) for p in d.get("passes", ())),
        )


def _second_best_floor(n: int, c: int) -> int:
    return -(2 * n * c + 1)


def _bid(benefit_row, allowed, prices, eps, floor):
    best_j, v, w = -1, None, None
    for j in allowed:
        val = benefit_row[j] - prices[j]
        if v is None or val > v:
            if v is not None:
                w = v
            best_j, v = j, val
        elif w is None or val > w:
            w = val
    if w is None:
        w = min(floor, v)
    return best_j, prices[best_j] + v - w + eps


def bid(instance: AssignmentInstance, prices, person: int, epsilon):
    """One bid by ``person`` at ``prices`` (original units).

    Returns ``(object, new_price)`` where the new price is the old one plus
    ``v - w + epsilon``, with ``v``/``w`` the best/second-best net values.
    A person with a single allowed object uses ``-(2nC + 1)`` as second-best.
    """
    allowed = instance.allowed[person]
    if not allowed:
        raise IsolatedPerson(person)
    floor = _second_best_floor(instance.n, instance.C)
    return _bid(instance.benefits[person], allowed, list(prices), epsilon, floor)


def _to_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    return Fraction(x)


def _scaled_rows(instance: AssignmentInstance, scale: int):
    return [tuple(a * scale for a in row) for row in instance.benefits]


def _dual_scaled(instance, rows, prices) -> int:
    total = sum(prices)
    for i in range(instance.n):
        total += max(rows[i][j] - prices[j] for j in instance.allowed[i])
    return total


def _run(instance: AssignmentInstance, rows, eps: int, prices: list, scale: int):
    """Gauss-Seidel auction in scaled units; mutates and returns ``prices``."""
    n = instance.n
    for i in range(n):
        if not instance.allowed[i]:
            raise IsolatedPerson(i)
    cs = instance.C * scale
    floor = _second_best_floor(n, cs)
    guard = max(prices) + (2 * n + 1) * cs + (n + 1) * eps
    owner = [-1] * instance.n_obj
    assigned = [-1] * n
    unassigned = list(range(n))
    heapq.heapify(unassigned)
    rounds = 0
    while unassigned:
        i = heapq.heappop(unassigned)
        j, new_price = _bid(rows[i], instance.allowed[i], prices, eps, floor)
        if new_price > guard:
            if prices[j] + eps > guard:
                raise Infeasible(f"price of object {j} passed the feasibility guard")
            new_price = guard
        prices[j] = new_price
        prev = owner[j]
        if prev >= 0:
            assigned[prev] = -1
            heapq.heappush(unassigned, prev)
        owner[j] = i
        assigned[i] = j
        rounds += 1
    return tuple(assigned), prices, rounds


def _result(instance, rows, assignment, prices, scale, eps_scaled, rounds, passes):
    return AuctionResult(
        assignment=assignment,
        prices=tuple(prices),
        scale=scale,
        epsilon=Fraction(eps_scaled, scale),
        rounds=rounds,
        primal=instance.value(assignment),
        dual=Fraction(_dual_scaled(instance, rows, prices), scale),
        passes=tuple(passes),
    )


def auction_solve(
    instance: AssignmentInstance,
    epsilon,
    initial_prices: Optional[Sequence] = None,
    scale: Optional[int] = None,
) -> AuctionResult:
    """Single auction pass with a fixed ``epsilon`` (original units).

    ``initial_prices`` are in original units and may be arbitrary.
    """
    eps = _to_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if scale is None:
        scale = math.lcm(instance.n + 1, eps.denominator)
    eps_scaled = eps * scale
    if eps_scaled.denominator != 1:
        raise ValueError(f"epsilon {eps} is not a multiple of 1/{scale}")
    eps_scaled = int(eps_scaled)
    if initial_prices is None:
        prices = [0] * instance.n_obj
    else:
        prices = [round(_to_fraction(p) * scale) for p in initial_prices]
    rows = _scaled_rows(instance, scale)
    assignment, prices, rounds = _run(instance, rows, eps_scaled, prices, scale)
    dual = _dual_scaled(instance, rows, prices)
    rec = PassRecord(eps_scaled, rounds, instance.value(assignment) * scale, dual)
    return _result(instance, rows, assignment, prices, scale, eps_scaled, rounds, [rec])


def epsilon_schedule(instance: AssignmentInstance, start: Optional[int] = None) -> list:
    """Scaled epsilon values: start at ``ceil((n+1)C/4)``, divide by 4, end at 1."""
    eps = start if start is not None else max(1, -(-(instance.n + 1) * instance.C // 4))
    eps = max(1, int(eps))
    out = [eps]
    while eps > 1:
        eps = max(1, -(-eps // 4))
        out.append(eps)
    return out


def auction_scaled(
    instance: AssignmentInstance,
    warm_prices: Optional[Sequence[int]] = None,
    start_epsilon: Optional[int] = None,
) -> AuctionResult:
    """Epsilon-scaling auction; the final pass has epsilon ``1/(n+1)``.

    ``warm_prices`` are scaled integers (scale ``n+1``), e.g. the ``prices``
    of an earlier result on a same-sized instance.  A warm start skips
    straight to the final epsilon unless ``start_epsilon`` (scaled) is given.
    """
    scale = instance.n + 1
    rows = _scaled_rows(instance, scale)
    if warm_prices is None:
        prices = [0] * instance.n_obj
        schedule = epsilon_schedule(instance, start_epsilon)
    else:
        if len(warm_prices) != instance.n_obj:
            raise ValueError("warm price vector has the wrong length")
        prices = [int(p) for p in warm_prices]
        schedule = epsilon_schedule(instance, start_epsilon if start_epsilon is not None else 1)
    passes = []
    total_rounds = 0
    assignment = ()
    for eps in schedule:
        assignment, prices, rounds = _run(instance, rows, eps, prices, scale)
        total_rounds += rounds
        passes.append(
            PassRecord(eps, rounds, instance.value(assignment) * scale,
                       _dual_scaled(instance, rows, prices))
        )
    return _result(instance, rows, assignment, prices, scale, schedule[-1], total_rounds, passes)


def asymmetric_solve(
    instance: AssignmentInstance, initial_prices: Optional[Sequence] = None
) -> AuctionResult:
    """More objects than persons: single pass from zero prices at epsilon ``1/(n+1)``."""
    if instance.n_obj <= instance.n:
        raise ValueError("asymmetric_solve needs more objects than persons")
    if initial_prices is not None and any(p != 0 for p in initial_prices):
        raise PriceInitError("asymmetric assignment must start from zero prices")
    return auction_solve(instance, Fraction(1, instance.n + 1), None, scale=instance.n + 1)


def solve_assignment(instance: AssignmentInstance, warm_prices=None) -> AuctionResult:
    """Optimal assignment by whichever auction variant fits the shape."""
    if instance.n_obj > instance.n:
        return asymmetric_solve(instance)
    return auction_scaled(instance, warm_prices)


def verify_eps_cs(instance: AssignmentInstance, result: AuctionResult):
    """Check epsilon-complementary slackness for every assigned person.

    Returns ``(ok, violations)``; violations are ``(person, reason)`` pairs and
    also cover structural problems (shared objects, disallowed pairs).
    """
    violations = []
    seen = {}
    for i, j in enumerate(result.assignment):
        if j is None or j < 0:
            continue
        if j not in instance.allowed[i]:
            violations.append((i, f"object {j} not allowed"))
            continue
        if j in seen:
            violations.append((i, f"object {j} also assigned to person {seen[j]}"))
        seen[j] = i
        scale = result.scale
        eps = result.epsilon * scale
        row = instance.benefits[i]
        own = row[j] * scale - result.prices[j]
        best = max(row[k] * scale - result.prices[k] for k in instance.allowed[i])
        if own < best - eps:
            violations.append((i, f"value {Fraction(own, scale)} below best {Fraction(best, scale)} by more than epsilon"))
    return not violations, violations


def dual_value(instance: AssignmentInstance, prices) -> Fraction:
    """Dual objective ``sum_j p_j + sum_i max_j (a_ij - p_j)`` (original units)."""
    ps = [_to_fraction(p) for p in prices]
    total = sum(ps, Fraction(0))
    for i in range(instance.n):
        if not instance.allowed[i]:
            raise IsolatedPerson(i)
        total += max(instance.benefits[i][j] - ps[j] for j in instance.allowed[i])
    return total


def make_result(instance, assignment, prices, epsilon, scale: int = 1, rounds: int = 0) -> AuctionResult:
    """Wrap a hand-built assignment and scaled price vector as a result."""
    prices = tuple(int(p) for p in prices)
    rows = _scaled_rows(instance, scale)
    return AuctionResult(
        tuple(assignment), prices, scale, _to_fraction(epsilon), rounds,
        instance.value(assignment), Fraction(_dual_scaled(instance, rows, prices), scale),
    )


def instance_to_json(instance: AssignmentInstance) -> dict:
    d = {
        "n": instance.n,
        "n_obj": instance.n_obj,
        "benefits": [a for row in instance.benefits for a in row],
    }
    if instance.mask is not None:
        d["mask"] = sorted([i, j] for i, j in instance.mask)
    return d


def instance_from_json(d: dict, trusted: bool = False) -> AssignmentInstance:
    n, n_obj = int(d["n"]), int(d.get("n_obj", d["n"]))
    flat = d["benefits"]
    if len(flat) != n * n_obj:
        raise ValueError("benefit array does not match n x n_obj")
    rows = tuple(tuple(flat[i * n_obj:(i + 1) * n_obj]) for i in range(n))
    mask = d.get("mask")
    return AssignmentInstance(rows, frozenset(map(tuple, mask)) if mask is not None else None, trusted)
