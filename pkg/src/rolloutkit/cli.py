"""Command-line front end: ``gen``, ``solve``, ``verify`` and ``bench``.

Exit codes: 0 success, 2 when the instance is declared infeasible, 1 for any
other error (including a failed verification).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

from . import bench, io, oracle
from .auction import (
    AuctionResult,
    asymmetric_solve,
    auction_scaled,
    auction_solve,
    verify_eps_cs,
)
from .discrete import TransportationSolution, facility_rollout
from .errors import BadParams, BudgetExceeded, InfeasibleError, RolloutKitError
from .instances import (
    frugal_heuristic,
    gen_assign2d,
    gen_assignnd,
    gen_facility,
    gen_separable,
    gen_toy_dp,
    greedy_heuristic,
)
from .multidim import (
    MultiAssignSolution,
    enforced_separation,
    itemized_3d_ledger,
    stated_3d_ledger,
    closed_form_nd_count,
    _rollout,
    DEFAULT_TUPLE_BUDGET,
)
from .rollout import run_variant
from .trajectory import extend

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    kind, seed = args.kind, args.seed
    params: dict = {}
    meta = None
    if kind == "assign2d":
        params = {"n": args.n, "n_obj": args.n_obj or args.n, "cmax": args.cmax}
        obj = gen_assign2d(args.n, seed, args.n_obj, args.cmax)
    elif kind in ("assign3d", "assignnd"):
        layers = 3 if kind == "assign3d" else args.layers
        if kind == "assignnd" and layers < 4:
            raise BadParams("assignnd needs --layers 4 or more")
        params = {"layers": layers, "m": args.m, "cmax": args.cmax}
        obj = gen_assignnd(layers, args.m, seed, args.cmax)
    elif kind in ("separable3d", "eps-separable3d"):
        eps = args.eps if kind == "eps-separable3d" else 0
        params = {"layers": 3, "m": args.m, "eps": eps}
        obj = gen_separable(3, args.m, seed, eps)
        meta = {"eps": eps, "tables": obj.meta["tables"]}
    elif kind == "facility":
        params = {"M": args.M, "N": args.N}
        obj = gen_facility(args.M, args.N, seed)
    elif kind == "toy-dp":
        params = {"horizon": args.horizon, "controls": args.controls, "states": args.states}
        obj = gen_toy_dp(seed, args.horizon, args.controls, args.states)
    else:
        raise BadParams(f"unknown kind {kind!r}")
    doc = io.instance_document(kind, obj, seed, params, meta)
    if args.out:
        io.write_json(args.out, doc)
    else:
        sys.stdout.write(io.dumps(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve


def _counts(**kw) -> dict:
    base = {"auction_2d_solves": 0, "transport_solves": 0, "heuristic_calls": 0, "auction_rounds": 0}
    base.update(kw)
    return base


def _solve_assign2d(inst, args) -> dict:
    method = args.method or "auction-scaled"
    if method == "auction-scaled":
        res = auction_scaled(inst)
    elif method == "auction":
        eps = Fraction(args.epsilon) if args.epsilon else Fraction(1, inst.n + 1)
        res = auction_solve(inst, eps)
    elif method == "asymmetric":
        res = asymmetric_solve(inst)
    else:
        raise BadParams(f"method {method!r} does not apply to assign2d")
    out = {
        "solver": method,
        "cost": res.primal,
        "baseline_cost": None,
        "counts": _counts(auction_2d_solves=1, auction_rounds=res.rounds),
        "result": res.to_json(),
    }
    if args.verify:
        out["oracle_cost"] = _oracle_value(
            lambda: oracle.exact_assignment_2d(inst.benefits, inst.mask, budget=_budget())[0]
        )
    return out


def _solve_multi(kind, inst, args) -> dict:
    method = args.method or "rollout"
    warm = not args.no_warm_start
    if method == "enforced-separation":
        run = enforced_separation(inst, None, {} if warm else None)
        out = {
            "solver": method,
            "cost": run.solution.cost,
            "baseline_cost": run.solution.cost,
            "counts": _counts(auction_2d_solves=run.solves, heuristic_calls=1, auction_rounds=run.rounds),
            "result": run.solution.to_json(),
            "ledger": {"measured_solves": run.solves, "closed_form_nd": closed_form_nd_count(inst.m, inst.N)},
        }
    elif method == "rollout":
        res = _rollout(inst, warm, DEFAULT_TUPLE_BUDGET)
        st = res.stats
        ledger = st.as_dict()
        if inst.layers == 3:
            ledger["stated_rollout_phase"] = stated_3d_ledger(inst.m)
            ledger["itemized_stages"] = itemized_3d_ledger(inst.m)
        out = {
            "solver": "rollout",
            "cost": res.solution.cost,
            "baseline_cost": res.heuristic.cost,
            "counts": _counts(
                auction_2d_solves=st.rollout_phase_solves,
                heuristic_calls=st.heuristic_calls,
                auction_rounds=st.rounds,
            ),
            "result": res.solution.to_json(),
            "ledger": ledger,
        }
    else:
        raise BadParams(f"method {method!r} does not apply to {kind}")
    if args.verify:
        out["oracle_cost"] = _oracle_value(
            lambda: oracle.exact_assignment_nd(inst.costs.tolist(), inst.layers, inst.m, _budget())[0]
        )
    return out


def _solve_facility(inst, args) -> dict:
    if args.method not in (None, "rollout"):
        raise BadParams(f"method {args.method!r} does not apply to facility")
    res = facility_rollout(inst, cache=args.cache == "on", variant=args.variant, budget=args.budget)
    out = {
        "solver": f"rollout/{args.variant}",
        "cost": res.cost,
        "baseline_cost": res.baseline_cost,
        "counts": _counts(
            transport_solves=res.transport_solves,
            baseline_transport_solves=res.baseline_solves,
            heuristic_calls=res.heuristic_calls,
        ),
        "result": res.to_json(),
    }
    if args.verify:
        out["oracle_cost"] = _oracle_value(
            lambda: oracle.exact_facility(
                inst.demands, inst.capacities, inst.placement_costs, inst.service_costs, _budget()
            )[1]
        )
    return out


def _solve_toy(toy, args) -> dict:
    if args.method not in (None, "rollout"):
        raise BadParams(f"method {args.method!r} does not apply to toy-dp")
    problem = toy.problem()
    h = greedy_heuristic(problem, toy) if args.heuristic == "greedy" else frugal_heuristic(problem, toy)
    out_r = run_variant(problem, h, args.variant, args.budget)
    out = {
        "solver": f"rollout/{args.variant}/{args.heuristic}",
        "cost": out_r.cost,
        "baseline_cost": out_r.baseline,
        "counts": _counts(heuristic_calls=out_r.heuristic_calls),
        "result": {
            "controls": list(out_r.controls),
            "cost": out_r.cost,
            "chain": list(out_r.chain),
            "trace": [r.as_dict() for r in out_r.trace],
        },
    }
    if args.verify:
        out["oracle_cost"] = _oracle_value(lambda: oracle.exact_dp(problem, _budget())[1])
    return out


def _budget():
    return oracle.OracleBudget()


def _oracle_value(run):
    # instances past the enumeration budget simply get no oracle figure
    try:
        return run()
    except BudgetExceeded:
        return None


def build_report(doc: dict, args) -> dict:
    kind, inst = io.load_instance(doc)
    t0 = time.perf_counter()
    if kind == "assign2d":
        body = _solve_assign2d(inst, args)
    elif kind in io.MULTI_KINDS:
        body = _solve_multi(kind, inst, args)
    elif kind == "facility":
        body = _solve_facility(inst, args)
    else:
        body = _solve_toy(inst, args)
    wall = time.perf_counter() - t0
    report = {
        "instance": {"kind": kind, "sha256": io.fingerprint(doc), "params": doc.get("params", {})},
        "seed": doc.get("seed"),
        "oracle_cost": None,
        "wall_time": wall,
    }
    report.update(body)
    if report["oracle_cost"] is not None:
        report["oracle_gap"] = _gap(kind, report["cost"], report["oracle_cost"])
    return report


def _gap(kind, cost, best):
    # benefits are maximized for assign2d, everything else is minimized
    return best - cost if kind == "assign2d" else cost - best


def without_wall_time(report: dict) -> str:
    return json.dumps({k: v for k, v in report.items() if k != "wall_time"}, sort_keys=True)


def _table(report: dict) -> str:
    lines = [
        f"kind        {report['instance']['kind']}",
        f"solver      {report['solver']}",
        f"cost        {report['cost']}",
        f"baseline    {report['baseline_cost']}",
    ]
    if report.get("oracle_cost") is not None:
        lines.append(f"oracle      {report['oracle_cost']}  (gap {report['oracle_gap']})")
    for k, v in report["counts"].items():
        lines.append(f"{k:<26}{v}")
    led = report.get("ledger")
    if led and "stated_rollout_phase" in led:
        lines.append(
            f"rollout-phase 2D solves   {led['rollout_phase_solves']} "
            f"(stated m^2+1 = {led['stated_rollout_phase']}, per job {led['stage_solves']})"
        )
    lines.append(f"wall time   {report['wall_time']:.3f}s")
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    doc = io.read_json(args.instance)
    report = build_report(doc, args)
    if args.report:
        io.write_json(args.report, report)
    if args.json:
        sys.stdout.write(io.dumps(report))
    else:
        sys.stdout.write(_table(report))
    gap = report.get("oracle_gap")
    if args.verify and gap not in (None, 0) and report["instance"]["kind"] == "assign2d":
        return EXIT_ERROR
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def verify_document(doc: dict, result: dict) -> list:
    """Replay structural checks and the oracle; returns ``(ok, message)`` lines."""
    kind, inst = io.load_instance(doc)
    res = result.get("result", result)
    lines = []

    def check(ok, msg):
        lines.append((bool(ok), msg))

    if kind == "assign2d":
        ar = AuctionResult.from_json(res)
        ok, bad = verify_eps_cs(inst, ar)
        check(len(set(ar.assignment)) == len(ar.assignment) == inst.n, "assignment is one-to-one and complete")
        check(ok, "epsilon-complementary slackness" + ("" if ok else f": {bad}"))
        check(inst.value(ar.assignment) == ar.primal, f"primal value recomputes to {inst.value(ar.assignment)}")
        if _fits(math.factorial(inst.n_obj)):
            best, _ = oracle.exact_assignment_2d(inst.benefits, inst.mask, budget=_budget())
            if ar.epsilon < Fraction(1, inst.n):
                check(ar.primal == best, f"primal {ar.primal} equals oracle optimum {best}")
            else:
                bound = inst.n * ar.epsilon
                check(best - ar.primal <= bound, f"primal within n*eps = {bound} of oracle optimum {best}")
    elif kind in io.MULTI_KINDS:
        groups = [tuple(g) for g in res["groupings"]]
        sol = MultiAssignSolution(tuple(sorted(groups)), int(res["cost"]))
        try:
            sol.validate(inst)
            check(True, "groupings partition every layer and the cost recomputes")
        except RolloutKitError as e:
            check(False, str(e))
        if _fits(math.factorial(inst.m) ** inst.N):
            best, _ = oracle.exact_assignment_nd(inst.costs.tolist(), inst.layers, inst.m, _budget())
            gap = sol.cost - best
            check(gap >= 0, f"gap to oracle optimum {best}: {gap}")
    elif kind == "facility":
        placements = tuple(res["placements"])
        tr = TransportationSolution(tuple(map(tuple, res["flows"])), None)
        service = sum(y * a for row, ar in zip(tr.flows, inst.service_costs) for y, a in zip(row, ar))
        tr = TransportationSolution(tr.flows, service)
        problems = tr.violations(inst, placements)
        for p in problems:
            check(False, p)
        if not problems:
            check(True, "flows meet every demand within open capacity")
        total = service + inst.placement_cost(placements)
        check(total == res["cost"], f"total cost recomputes to {total}")
        if _fits(2 ** inst.N * 10**3):
            _, best = oracle.exact_facility(
                inst.demands, inst.capacities, inst.placement_costs, inst.service_costs, _budget()
            )
            check(res["cost"] >= best, f"gap to oracle optimum {best}: {res['cost'] - best}")
    else:
        problem = inst.problem()
        y = problem.start()
        try:
            for u in res["controls"]:
                y = extend(y, u, problem)
        except RolloutKitError as e:
            check(False, f"controls do not replay: {e}")
            return lines
        check(y.length == problem.horizon, "trajectory reaches the horizon")
        if y.length == problem.horizon:
            check(problem.feasible(y), "trajectory satisfies the resource limit")
            check(problem.cost(y) == res["cost"], f"cost recomputes to {problem.cost(y)}")
            best = _oracle_value(lambda: oracle.exact_dp(problem, _budget())[1])
            if best is not None:
                check(res["cost"] >= best, f"gap to oracle optimum {best}: {res['cost'] - best}")
    return lines


def _fits(n: int) -> bool:
    return n <= oracle.OracleBudget().limit


def cmd_verify(args) -> int:
    doc = io.read_json(args.instance)
    result = io.read_json(args.result)
    lines = verify_document(doc, result)
    for ok, msg in lines:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'}  {msg}\n")
    return EXIT_OK if all(ok for ok, _ in lines) else EXIT_ERROR


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    if args.what == "warmstart":
        out = bench.warm_start_benchmark(args.n, args.trials, args.seed)
        summary = (
            f"warm/cold round ratio, median over {out['trials']} one-entry perturbations "
            f"(n={out['n']}): {out['median_ratio']:.3f}; warm <= cold on "
            f"{out['warm_not_worse']}/{out['trials']}\n"
        )
    else:
        out = bench.rollout3d_ledger(args.m, args.trials, args.seed)
        measured = sorted({r["rollout_phase_solves"] for r in out["runs"]})
        summary = (
            f"rollout_3d m={args.m}: rollout-phase 2D solves {measured}, stated m^2+1 = "
            f"{out['stated_total']}, itemized {out['itemized']} + 1 = {out['itemized_total_plus_final']}\n"
        )
    if args.report:
        io.write_json(args.report, out)
    sys.stdout.write(summary)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rolloutkit", description="rollout and auction toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a seeded instance")
    g.add_argument("kind", choices=io.KINDS)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, default=5)
    g.add_argument("--n-obj", type=int, default=None)
    g.add_argument("--cmax", type=int, default=100)
    g.add_argument("--m", type=int, default=3)
    g.add_argument("--layers", type=int, default=4)
    g.add_argument("--eps", type=int, default=1)
    g.add_argument("--M", type=int, default=2)
    g.add_argument("--N", type=int, default=3)
    g.add_argument("--horizon", type=int, default=4)
    g.add_argument("--controls", type=int, default=2)
    g.add_argument("--states", type=int, default=5)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--method")
    s.add_argument("--variant", choices=("plain", "fortified", "tree"), default="fortified")
    s.add_argument("--budget", type=int)
    s.add_argument("--epsilon")
    s.add_argument("--heuristic", choices=("greedy", "frugal"), default="frugal")
    s.add_argument("--no-warm-start", action="store_true")
    s.add_argument("--cache", choices=("on", "off"), default="on")
    s.add_argument("--verify", action="store_true", help="also run the brute-force oracle")
    s.add_argument("--report", help="write the JSON report here")
    s.add_argument("--json", action="store_true", help="print JSON instead of the table")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a result against its instance")
    v.add_argument("instance")
    v.add_argument("result")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="report measured counts and ratios")
    b.add_argument("what", choices=("warmstart", "rollout3d"))
    b.add_argument("--n", type=int, default=50)
    b.add_argument("--m", type=int, default=3)
    b.add_argument("--trials", type=int, default=50)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--report")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as e:
        sys.stderr.write(f"infeasible: {e}\n")
        return EXIT_INFEASIBLE
    except (RolloutKitError, OSError, ValueError, KeyError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
