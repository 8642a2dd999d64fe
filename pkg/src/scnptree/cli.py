"""Command-line front end: generate, evaluate, solve, benchmark, reduce.

Result records are JSON objects with method, value (upper bound), bound
(lower bound), gap = 1 - bound/value (0 when the value is 0), status,
time, and iteration/cut counts where the method has them.  The bench
subcommand persists one record per (instance, method) keyed by instance
content hash, so interrupted runs resume, and aggregates them into a CSV
with the fixed header::

    n,scheme,method,instances,mean_time_s,mean_gap_pct,closed,mean_iterations,mean_cuts

Exit codes: 0 on success, 1 on solver failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import re
import sys
import time
from pathlib import Path

from scnptree import benders as benders_mod
from scnptree import dp as dp_mod
from scnptree import generator, models, reductions
from scnptree.evaluator import exhaustive_solve, objective_scenarios, objective_tree
from scnptree.instance import (
    AttackVector,
    InstanceError,
    ParseError,
    TreeInstance,
    build_path_table,
    make_instance,
    read_instance,
    write_instance,
)
from scnptree.milpcore import STATUS_OPTIMAL, solve_milp

METHODS = ("benders", "milp", "ilp-p", "dp", "exhaustive")
BENCH_CSV_HEADER = "n,scheme,method,instances,mean_time_s,mean_gap_pct,closed,mean_iterations,mean_cuts"
_FILENAME_RE = re.compile(r"^tree_n(\d+)_(unit|type1|type2|type3)_(\d+)\.json$")


def _gap(value: float | None, bound: float | None) -> float:
    if value is None or bound is None:
        return 1.0
    if value == 0.0:
        return 0.0
    return max(0.0, 1.0 - bound / value)


def _write_json_atomic(payload: dict, path: Path) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=1, sort_keys=True)
        handle.write("\n")
    os.replace(tmp, path)


def solve_instance(instance: TreeInstance, method: str, params: dict) -> dict:
    """Run one solver and normalize its outcome into a result record."""
    started = time.perf_counter()
    eps = params.get("eps", 1e-3)
    backend = params.get("backend", "auto")
    time_limit = params.get("time_limit")
    record: dict = {"method": method}

    if method == "exhaustive":
        attack, value = exhaustive_solve(instance)
        record.update(
            value=value,
            bound=value,
            status=STATUS_OPTIMAL,
            attack=list(attack.attacked),
            iterations=None,
            cuts=None,
        )
    elif method == "benders":
        result = benders_mod.bd_scnp(
            instance,
            eps=eps,
            time_limit=time_limit,
            use_valid_ineq=params.get("use_valid_ineq", True),
            backend=backend,
        )
        record.update(
            value=result.upper_bound,
            bound=result.lower_bound,
            status=result.status,
            attack=list(result.attack.attacked) if result.attack else None,
            iterations=result.iterations,
            cuts=result.cuts_total,
        )
        if params.get("trace_path"):
            benders_mod.write_trace_csv(result, params["trace_path"])
    elif method == "milp":
        paths = build_path_table(instance)
        model, index = models.build_chain_milp(
            instance,
            paths,
            share_prefixes=params.get("share_prefixes", False),
            add_valid_ineq=params.get("use_valid_ineq", True),
        )
        res = solve_milp(model, gap=eps, time_limit=time_limit, backend=backend)
        attack = models.attack_from_solution(index.attack, res.x) if res.x is not None else None
        record.update(
            value=res.objective,
            bound=res.bound,
            status=res.status,
            attack=list(attack.attacked) if attack else None,
            iterations=res.nodes,
            cuts=None,
        )
    elif method == "ilp-p":
        paths = build_path_table(instance)
        model, index = models.build_ilp_p(instance, paths)
        res = solve_milp(model, gap=eps, time_limit=time_limit, backend=backend)
        attack = models.attack_from_solution(index.attack, res.x) if res.x is not None else None
        record.update(
            value=res.objective,
            bound=res.bound,
            status=res.status,
            attack=list(attack.attacked) if attack else None,
            iterations=res.nodes,
            cuts=None,
        )
    elif method == "dp":
        max_attacks = int(instance.budget + 1e-9)
        result = dp_mod.dp_solve(instance, max_attacks, params.get("nu", 4))
        record.update(
            value=result.exact_value,
            bound=result.truncated_value,
            status=STATUS_OPTIMAL,
            attack=list(result.attack.attacked),
            iterations=None,
            cuts=None,
            slack_bound=result.slack_bound,
        )
    else:
        raise ValueError(f"unknown method {method!r}")

    elapsed = time.perf_counter() - started
    if record.get("status") == "TimeLimit" and time_limit is not None:
        elapsed = float(time_limit)
    record["time"] = elapsed
    record["gap"] = _gap(record.get("value"), record.get("bound"))
    return record


# -- subcommands ------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for offset in range(args.count):
        seed = args.seed + offset
        instance = generator.generate_instance(args.n, args.scheme, seed)
        path = out_dir / generator.instance_filename(args.n, args.scheme, seed)
        write_instance(instance, path)
        print(path)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    nodes = [int(v) for v in args.attack.split(",") if v.strip() != ""] if args.attack else []
    attack = AttackVector.from_nodes(nodes, instance.node_count)
    if args.by_scenarios:
        value = objective_scenarios(instance, attack)
    else:
        value = objective_tree(instance, build_path_table(instance), attack)
    print(
        json.dumps(
            {
                "value": value,
                "attack": list(attack.attacked),
                "attack_cost": attack.total_cost(instance),
                "feasible": attack.is_feasible(instance),
            }
        )
    )
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    params = {
        "eps": args.eps,
        "time_limit": args.time_limit,
        "use_valid_ineq": not args.no_vi,
        "backend": args.backend,
        "nu": args.nu,
        "share_prefixes": args.share_prefixes,
        "trace_path": args.trace,
    }
    record = solve_instance(instance, args.method, params)
    text = json.dumps(record, indent=1, sort_keys=True)
    if args.out:
        _write_json_atomic(record, Path(args.out))
    print(text)
    return 0


def _bench_task(task: tuple) -> tuple[str, str, dict]:
    instance_path, method, params, record_path = task
    instance = read_instance(instance_path)
    record = solve_instance(instance, method, params)
    record["instance"] = os.path.basename(instance_path)
    _write_json_atomic(record, Path(record_path))
    return instance_path, method, record


def _instance_label(path: Path) -> tuple[int, str]:
    match = _FILENAME_RE.match(path.name)
    if match:
        return int(match.group(1)), match.group(2)
    try:
        instance = read_instance(path)
        return instance.node_count, "custom"
    except (ParseError, InstanceError):
        return -1, "unreadable"


def cmd_bench(args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for method in methods:
        if method not in METHODS:
            print(f"unknown method {method!r}", file=sys.stderr)
            return 2
    results_dir = Path(args.results_dir)
    results_dir.mkdir(parents=True, exist_ok=True)

    files = sorted(directory.glob("*.json"))
    tasks = []
    labels: dict[str, tuple[int, str]] = {}
    records: dict[tuple[str, str], dict] = {}
    for path in files:
        n, scheme = _instance_label(path)
        if scheme == "unreadable":
            print(f"warning: skipping unreadable instance {path}", file=sys.stderr)
            continue
        labels[str(path)] = (n, scheme)
        digest = hashlib.sha256(path.read_bytes()).hexdigest()[:12]
        for method in methods:
            record_path = results_dir / f"{digest}_{method}.json"
            if record_path.exists():
                with open(record_path, "r", encoding="utf-8") as handle:
                    records[(str(path), method)] = json.load(handle)
                continue
            params = {
                "eps": args.eps,
                "time_limit": args.time_limit,
                "use_valid_ineq": not args.no_vi,
                "backend": args.backend,
                "nu": args.nu,
            }
            tasks.append((str(path), method, params, str(record_path)))

    if tasks:
        if args.workers > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
                for instance_path, method, record in pool.map(_bench_task, tasks):
                    records[(instance_path, method)] = record
        else:
            for task in tasks:
                instance_path, method, record = _bench_task(task)
                records[(instance_path, method)] = record

    groups: dict[tuple[int, str, str], list[dict]] = {}
    for (instance_path, method), record in records.items():
        n, scheme = labels[instance_path]
        groups.setdefault((n, scheme, method), []).append(record)

    def mean(values: list) -> float | None:
        usable = [v for v in values if v is not None]
        return sum(usable) / len(usable) if usable else None

    rows = []
    for (n, scheme, method) in sorted(groups):
        bucket = groups[(n, scheme, method)]
        rows.append(
            {
                "n": n,
                "scheme": scheme,
                "method": method,
                "instances": len(bucket),
                "mean_time_s": mean([r.get("time") for r in bucket]),
                "mean_gap_pct": mean([100.0 * r.get("gap", 1.0) for r in bucket]),
                "closed": sum(1 for r in bucket if r.get("status") == STATUS_OPTIMAL),
                "mean_iterations": mean([r.get("iterations") for r in bucket]),
                "mean_cuts": mean([r.get("cuts") for r in bucket]),
            }
        )

    def fmt(value, digits=4) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return f"{value:.{digits}f}"
        return str(value)

    csv_lines = [BENCH_CSV_HEADER]
    for row in rows:
        csv_lines.append(
            ",".join(
                fmt(row[key])
                for key in (
                    "n",
                    "scheme",
                    "method",
                    "instances",
                    "mean_time_s",
                    "mean_gap_pct",
                    "closed",
                    "mean_iterations",
                    "mean_cuts",
                )
            )
        )
    csv_text = "\n".join(csv_lines) + "\n"
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")

    header = BENCH_CSV_HEADER.split(",")
    widths = [
        max(len(header[col]), *(len(fmt(row[header[col]])) for row in rows)) if rows else len(header[col])
        for col in range(len(header))
    ]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        print("  ".join(fmt(row[h]).ljust(w) for h, w in zip(header, widths)))
    return 0


def _instance_from_payload(payload: dict) -> TreeInstance:
    costs = payload.get("c", "unit")
    return make_instance(
        node_count=payload["n"],
        edges=payload["edges"],
        survival_prob=payload["p"],
        attack_cost=payload["kappa"],
        connection_cost=None if costs == "unit" else costs,
        budget=payload["K"],
    )


def cmd_reduce(args: argparse.Namespace) -> int:
    with open(args.input, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if args.kind == "knapsack":
        items = [(float(p), float(w)) for p, w in payload["items"]]
        instance, threshold = reductions.knapsack_to_dscnp(
            items, float(payload["capacity"]), float(payload["target"])
        )
        write_instance(instance, args.out)
        print(json.dumps({"instance": args.out, "threshold": threshold}))
    elif args.kind == "cedp":
        base = _instance_from_payload(payload["instance"])
        edge_p = {(int(u), int(v)): float(p) for u, v, p in payload["edge_p"]}
        edge_k = {(int(u), int(v)): float(k) for u, v, k in payload["edge_kappa"]}
        instance = reductions.cedp_to_scnp(base, edge_p, edge_k)
        write_instance(instance, args.out)
        print(json.dumps({"instance": args.out}))
    else:  # edge-uncertainty
        base = _instance_from_payload(payload["instance"])
        presence = {(int(u), int(v)): float(p) for u, v, p in payload["edge_presence"]}
        instance = reductions.edge_uncertainty_to_deterministic(base, presence)
        write_instance(instance, args.out)
        print(json.dumps({"instance": args.out}))
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    """Seeded oracle-equivalence suite; prints one line per check."""
    import numpy as np

    failures = 0

    def report(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        line = f"{'PASS' if ok else 'FAIL'} {name}"
        if detail:
            line += f" ({detail})"
        print(line)
        if not ok:
            failures += 1

    rng = np.random.default_rng(args.seed)

    worst = 0.0
    for trial in range(12):
        n = int(rng.integers(4, 9))
        instance = generator.generate_instance(n, "unit", int(rng.integers(10_000)))
        paths = build_path_table(instance)
        for flags in _sample_attacks(instance, rng, 8):
            attack = AttackVector(flags)
            worst = max(worst, abs(objective_tree(instance, paths, attack) - objective_scenarios(instance, attack)))
    report("objective path-product vs scenario enumeration", worst <= 1e-9, f"max diff {worst:.2e}")

    worst = 0.0
    for seed in range(4):
        instance = generator.generate_instance(7, "type1", 500 + seed)
        _, value = exhaustive_solve(instance)
        result = benders_mod.bd_scnp(instance, eps=1e-3)
        paths = build_path_table(instance)
        model, _ = models.build_chain_milp(instance, paths, add_valid_ineq=True)
        milp_value = solve_milp(model, gap=1e-3).objective
        worst = max(worst, abs(value - result.upper_bound), abs(value - milp_value))
    report("exhaustive vs cut loop vs chain model", worst <= 1e-3, f"max diff {worst:.2e}")

    worst = 0.0
    feasible = True
    for _ in range(200):
        length = int(rng.integers(2, 9))
        instance, path, attack = _random_path_case(rng, length)
        duals = benders_mod.analytic_dual(instance, path, attack)
        primal = benders_mod.slave_primal(instance, path, attack)
        dual_value = benders_mod.dual_objective(duals, instance, path, attack)
        worst = max(worst, abs(dual_value - primal.objective))
        feasible = feasible and benders_mod.dual_feasibility_check(duals, instance, path)
    report("closed-form duals: strong duality + feasibility", worst <= 1e-9 and feasible, f"max diff {worst:.2e}")

    ok = True
    for seed in range(3):
        instance = generator.generate_instance(8, "unit", 900 + seed)
        budget = int(instance.budget + 1e-9)
        result = dp_mod.dp_solve(instance, budget, 4)
        _, opt = exhaustive_solve(instance)
        ok = ok and result.truncated_value <= opt + 1e-12 <= result.exact_value + 1e-9
        ok = ok and result.exact_value <= result.truncated_value + result.slack_bound + 1e-9
    report("dynamic program sandwich bound", ok)

    instance, threshold = reductions.knapsack_to_dscnp([(3.0, 2.0), (2.0, 1.0)], 2.0, 3.0)
    _, value = exhaustive_solve(instance)
    report("knapsack gadget yes-instance", value <= threshold + 1e-9, f"value {value:.6f} vs {threshold}")

    return 1 if failures else 0


def _sample_attacks(instance: TreeInstance, rng, count: int) -> list[tuple[int, ...]]:
    """Random budget-feasible flag tuples, attacking cheap nodes first."""
    n = instance.node_count
    out = []
    for _ in range(count):
        flags = [0] * n
        order = list(rng.permutation(n))
        spent = 0.0
        for node in order:
            if instance.survival_prob[node] >= 1.0:
                continue
            cost = instance.attack_cost[node]
            if spent + cost <= instance.budget + 1e-9 and rng.random() < 0.6:
                flags[node] = 1
                spent += cost
        out.append(tuple(flags))
    return out


def _random_path_case(rng, length: int):
    """A path instance, its single source-to-leaf path, and random flags."""
    edges = [(i, i + 1) for i in range(length - 1)]
    p = [round(float(rng.uniform()), 2) for _ in range(length)]
    flags = tuple(int(rng.integers(0, 2)) if p[i] < 1.0 else 0 for i in range(length))
    instance = make_instance(
        node_count=length,
        edges=edges,
        survival_prob=p,
        attack_cost=[1.0] * length,
        connection_cost=None,
        budget=float(length),
    )
    path = tuple(range(length))
    return instance, path, AttackVector(flags)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scnptree",
        description="Interdiction of probabilistic tree networks: generate, evaluate, solve, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write random instances")
    p_gen.add_argument("--n", type=int, required=True, help="number of nodes")
    p_gen.add_argument("--scheme", choices=generator.SCHEMES, default="unit")
    p_gen.add_argument("--count", type=int, default=1, help="instances to write")
    p_gen.add_argument("--seed", type=int, default=0, help="seed of the first instance")
    p_gen.add_argument("--out-dir", default=".", help="output directory")
    p_gen.set_defaults(func=cmd_gen)

    p_eval = sub.add_parser("eval", help="evaluate one attack vector")
    p_eval.add_argument("instance")
    p_eval.add_argument("--attack", default="", help="comma-separated attacked nodes")
    p_eval.add_argument(
        "--by-scenarios",
        action="store_true",
        help="use the exponential scenario enumeration instead of path products",
    )
    p_eval.set_defaults(func=cmd_eval)

    p_solve = sub.add_parser("solve", help="solve one instance")
    p_solve.add_argument("instance")
    p_solve.add_argument("--method", choices=METHODS, required=True)
    p_solve.add_argument("--eps", type=float, default=1e-3, help="absolute optimality gap")
    p_solve.add_argument("--no-vi", action="store_true", help="drop leaf dominance rows")
    p_solve.add_argument("--time-limit", type=float, default=None, help="seconds")
    p_solve.add_argument("--nu", type=int, default=4, help="truncation decimals for --method dp")
    p_solve.add_argument(
        "--share-prefixes", action="store_true", help="share chain variables per start node"
    )
    p_solve.add_argument("--backend", choices=("auto", "simplex", "highs"), default="auto")
    p_solve.add_argument("--trace", default=None, help="write per-iteration CSV (benders)")
    p_solve.add_argument("--out", default=None, help="also write the result record here")
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="run methods over an instance directory")
    p_bench.add_argument("directory")
    p_bench.add_argument("--methods", default="benders,milp", help="comma-separated")
    p_bench.add_argument("--eps", type=float, default=1e-3)
    p_bench.add_argument("--time-limit", type=float, default=None)
    p_bench.add_argument("--no-vi", action="store_true")
    p_bench.add_argument("--nu", type=int, default=4)
    p_bench.add_argument("--backend", choices=("auto", "simplex", "highs"), default="auto")
    p_bench.add_argument("--workers", type=int, default=max(1, min(4, os.cpu_count() or 1)))
    p_bench.add_argument("--results-dir", default="results")
    p_bench.add_argument("--csv", default=None, help="write the aggregate CSV here")
    p_bench.set_defaults(func=cmd_bench)

    p_reduce = sub.add_parser("reduce", help="apply a problem transformation")
    p_reduce.add_argument("--kind", choices=("knapsack", "cedp", "edge-uncertainty"), required=True)
    p_reduce.add_argument("input", help="JSON payload, see README for shapes")
    p_reduce.add_argument("--out", required=True, help="output instance file")
    p_reduce.set_defaults(func=cmd_reduce)

    p_check = sub.add_parser("check", help="run the seeded oracle-equivalence suite")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.set_defaults(func=cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, InstanceError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver-side failures
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
