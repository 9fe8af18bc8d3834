"""Measurements that are reported rather than asserted."""

from __future__ import annotations

import statistics

from . import rng as _rng
from .auction import AssignmentInstance, auction_scaled
from .instances import gen_assign2d, gen_assign3d
from .multidim import itemized_3d_ledger, stated_3d_ledger, rollout_3d


def perturb_one(instance: AssignmentInstance, gen) -> tuple:
    """Copy of ``instance`` with one random entry moved by +1 or -1."""
    i = int(gen.integers(0, instance.n))
    j = int(gen.integers(0, instance.n_obj))
    delta = 1 if gen.random() < 0.5 else -1
    rows = [list(r) for r in instance.benefits]
    rows[i][j] += delta
    return AssignmentInstance(rows, instance.mask, trusted=True), (i, j, delta)


def warm_start_benchmark(n: int = 50, trials: int = 50, seed: int = 0) -> dict:
    """Rounds needed after a one-entry change, warm-started from the old
    optimal prices versus a cold epsilon-scaling solve."""
    base = gen_assign2d(n, seed)
    ref = auction_scaled(base)
    gen = _rng.stream(seed, _rng.BENCH)
    rows = []
    for _ in range(trials):
        inst, change = perturb_one(base, gen)
        warm = auction_scaled(inst, ref.prices)
        cold = auction_scaled(inst)
        rows.append(
            {
                "change": list(change),
                "warm_rounds": warm.rounds,
                "cold_rounds": cold.rounds,
                "ratio": warm.rounds / cold.rounds,
                "same_value": warm.primal == cold.primal,
            }
        )
    ratios = [r["ratio"] for r in rows]
    return {
        "n": n,
        "trials": trials,
        "seed": seed,
        "median_ratio": statistics.median(ratios),
        "warm_not_worse": sum(r["warm_rounds"] <= r["cold_rounds"] for r in rows),
        "all_same_value": all(r["same_value"] for r in rows),
        "runs": rows,
    }


def rollout3d_ledger(m: int, count: int, seed: int = 0) -> dict:
    runs = []
    for s in range(seed, seed + count):
        res = rollout_3d(gen_assign3d(m, s))
        runs.append(
            {
                "seed": s,
                "rollout_phase_solves": res.stats.rollout_phase_solves,
                "stage_solves": res.stats.stage_solves,
                "initial_solves": res.stats.initial_solves,
            }
        )
    return {
        "m": m,
        "stated_total": stated_3d_ledger(m),
        "itemized": itemized_3d_ledger(m),
        "itemized_total_plus_final": sum(itemized_3d_ledger(m)) + 1,
        "runs": runs,
    }
