"""Cut-generation solver: binary master plus closed-form path slaves.

The master chooses attack flags v and one surrogate value z per node pair
under the budget; each pair's slave prices the chain model at fixed v in
closed form.  Dual values for every slave are available analytically, so
optimality cuts cost O(path length) and never touch an LP.  Lower bounds
come from the master, upper bounds from evaluating the incumbent flags;
the loop stops when they meet within ``eps``.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from scnptree.instance import AttackVector, PathTable, TreeInstance, build_path_table
from scnptree.milpcore import (
    STATUS_INFEASIBLE,
    STATUS_ITERATION_LIMIT,
    STATUS_OPTIMAL,
    STATUS_TIME_LIMIT,
    GREATER_EQUAL,
    LinearModel,
    solve_milp,
)
from scnptree.models import _add_attack_block, attack_from_solution

TRACE_HEADER = ("iteration", "LB", "UB", "cuts_added", "cumulative_cuts", "elapsed")


class MasterInfeasible(RuntimeError):
    """The relaxed master rejected even v = 0; something upstream is broken."""


@dataclass(frozen=True)
class SlaveSolution:
    """Closed-form optimum of one pair's chain at fixed attack flags.

    ``survival[k]`` is the product of per-node survival factors over the
    first k+1 path nodes; ``removal[k]`` the mass removed at that step.
    """

    survival: tuple[float, ...]
    removal: tuple[float, ...]
    objective: float


@dataclass(frozen=True)
class PathDuals:
    """Multipliers of one slave's rows, aligned with path positions.

    ``attack_cap`` prices the rows tying removal to the attack flag (an
    equality at position 0, an upper cap beyond), ``balance`` the survival
    bookkeeping equalities, ``survival_cap`` the cap of removal by the
    incoming survival level, and ``joint_lower`` the lower linearization
    row; the latter two are zero at position 0 where no predecessor exists.
    """

    attack_cap: tuple[float, ...]
    balance: tuple[float, ...]
    survival_cap: tuple[float, ...]
    joint_lower: tuple[float, ...]


@dataclass(frozen=True)
class BendersCut:
    """Affine lower bound z >= constant + sum coefficient_i * v_i."""

    pair: tuple[int, int]
    constant: float
    coefficients: tuple[tuple[int, float], ...]

    def evaluate(self, flags) -> float:
        return self.constant + sum(c * flags[i] for i, c in self.coefficients)


@dataclass(frozen=True)
class CutRecord:
    """A generated cut plus the master point that triggered it."""

    iteration: int
    cut: BendersCut
    master_flags: tuple[int, ...]
    master_z: float
    slave_value: float


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    lower_bound: float
    upper_bound: float
    cuts_added: int
    cuts_total: int
    elapsed: float


@dataclass(frozen=True)
class BendersResult:
    status: str
    attack: AttackVector | None
    upper_bound: float
    lower_bound: float
    iterations: int
    cuts_total: int
    elapsed: float
    trace: tuple[TraceRow, ...]
    cuts: tuple[CutRecord, ...]

    def relative_gap(self) -> float:
        if self.upper_bound == 0.0:
            return 0.0
        return max(0.0, 1.0 - self.lower_bound / self.upper_bound)


def slave_primal(instance: TreeInstance, path: tuple[int, ...], attack: AttackVector) -> SlaveSolution:
    """Optimal chain levels at fixed flags: survival multiplies per node."""
    cost = instance.pair_cost(path[0], path[-1])
    survival: list[float] = []
    removal: list[float] = []
    level = 1.0
    for node in path:
        drop = (1.0 - instance.survival_prob[node]) * attack.flags[node] * level
        removal.append(drop)
        level -= drop
        survival.append(level)
    return SlaveSolution(tuple(survival), tuple(removal), cost * level)


def pair_values(instance: TreeInstance, paths: PathTable, attack: AttackVector) -> dict[tuple[int, int], float]:
    """Slave objectives for every pair in one pass of prefix products."""
    n = instance.node_count
    factor = [1.0 - (1.0 - p) * v for p, v in zip(instance.survival_prob, attack.flags)]
    costs = instance.connection_cost
    prod = [0.0] * n
    values: dict[tuple[int, int], float] = {}
    for source in range(n - 1):
        prod[source] = factor[source]
        for node, parent in paths.preorder[source]:
            value = prod[parent] * factor[node]
            prod[node] = value
            if node > source:
                if costs is None:
                    values[(source, node)] = value
                else:
                    values[(source, node)] = costs.get((source, node), 1.0) * value
    return values


def analytic_dual(instance: TreeInstance, path: tuple[int, ...], attack: AttackVector) -> PathDuals:
    """Closed-form optimal slave duals at the given flags.

    If an attacked node on the path survives with probability zero the pair
    is certainly cut and every multiplier is zero.  Otherwise the last
    position is priced by the pair cost and a backward recursion folds each
    node's survival factor into its predecessor's balance multiplier.
    Strong duality against slave_primal holds exactly.
    """
    length = len(path)
    p = instance.survival_prob
    v = attack.flags
    if any(v[node] and p[node] == 0.0 for node in path):
        zeros = (0.0,) * length
        return PathDuals(zeros, zeros, zeros, zeros)

    cost = instance.pair_cost(path[0], path[-1])
    attack_cap = [0.0] * length
    balance = [0.0] * length
    survival_cap = [0.0] * length
    joint_lower = [0.0] * length

    last = path[-1]
    balance[length - 1] = cost
    attack_cap[length - 1] = cost * (v[last] - 1.0)
    survival_cap[length - 1] = -cost * v[last]
    for k in range(length - 2, -1, -1):
        nxt = path[k + 1]
        balance[k] = (1.0 - p[nxt]) * (survival_cap[k + 1] + joint_lower[k + 1]) + balance[k + 1]
        if k == 0:
            attack_cap[0] = -balance[0]
        else:
            node = path[k]
            attack_cap[k] = (v[node] - 1.0) * balance[k]
            survival_cap[k] = -v[node] * balance[k]
    return PathDuals(tuple(attack_cap), tuple(balance), tuple(survival_cap), tuple(joint_lower))


def dual_objective(duals: PathDuals, instance: TreeInstance, path: tuple[int, ...], attack: AttackVector) -> float:
    """Value of the slave dual at these multipliers and attack flags."""
    p = instance.survival_prob
    v = attack.flags
    first = path[0]
    total = duals.attack_cap[0] * (1.0 - p[first]) * v[first] + duals.balance[0]
    for k in range(1, len(path)):
        node = path[k]
        q = 1.0 - p[node]
        total += q * (duals.attack_cap[k] * v[node] + duals.joint_lower[k] * (v[node] - 1.0))
    return total


def dual_feasibility_check(
    duals: PathDuals,
    instance: TreeInstance,
    path: tuple[int, ...],
    tol: float = 1e-9,
) -> bool:
    """Exact row-by-row check of the slave dual constraints.

    Columns of the slave give, per position k: the removal column row sum
    must not exceed zero, interior survival columns must price out against
    the next position, the last survival column is capped by the pair cost,
    and inequality-row multipliers carry their signs.
    """
    length = len(path)
    p = instance.survival_prob
    cost = instance.pair_cost(path[0], path[-1])
    a, b, s, j = duals.attack_cap, duals.balance, duals.survival_cap, duals.joint_lower

    if a[0] + b[0] > tol:
        return False
    for k in range(1, length):
        if a[k] + s[k] + j[k] + b[k] > tol:
            return False
        if a[k] > tol or s[k] > tol or j[k] < -tol:
            return False
    for k in range(length - 1):
        q = 1.0 - p[path[k + 1]]
        if b[k] - q * (s[k + 1] + j[k + 1]) - b[k + 1] > tol:
            return False
    if b[length - 1] > cost + tol:
        return False
    return True


def cut_from_duals(duals: PathDuals, instance: TreeInstance, path: tuple[int, ...]) -> BendersCut:
    """Affine minorant of the pair's slave value over attack flags.

    Grouping the dual objective by v gives the constant and one coefficient
    per path node; by weak duality the expression under-estimates the slave
    value at every feasible v and is tight at the flags that produced the
    duals.
    """
    p = instance.survival_prob
    constant = duals.balance[0]
    coefficients = [(path[0], (1.0 - p[path[0]]) * duals.attack_cap[0])]
    for k in range(1, len(path)):
        node = path[k]
        q = 1.0 - p[node]
        constant -= q * duals.joint_lower[k]
        coefficients.append((node, q * (duals.attack_cap[k] + duals.joint_lower[k])))
    pair = (path[0], path[-1]) if path[0] < path[-1] else (path[-1], path[0])
    return BendersCut(pair=pair, constant=constant, coefficients=tuple(coefficients))


def _build_master(
    instance: TreeInstance,
    pairs: list[tuple[int, int]],
    use_valid_ineq: bool,
) -> tuple[LinearModel, tuple[int, ...], dict[tuple[int, int], int]]:
    model = LinearModel("interdiction_master")
    attack_cols = _add_attack_block(model, instance, fix_certain=True, add_valid_ineq=use_valid_ineq)
    z_cols = {pair: model.add_variable(f"z_{pair[0]}_{pair[1]}", objective=1.0) for pair in pairs}
    return model, attack_cols, z_cols


def bd_scnp(
    instance: TreeInstance,
    eps: float = 1e-3,
    time_limit: float | None = None,
    use_valid_ineq: bool = True,
    backend: str = "auto",
    max_iterations: int | None = None,
) -> BendersResult:
    """Exact minimization by iterating master solves and analytic cuts.

    Each round solves the master to (near) optimality, reads off a lower
    bound, evaluates every slave at the proposed flags for an upper bound,
    and appends one cut per pair whose surrogate undercuts its slave value
    by more than 1e-9.  The previous flags and slave values warm-start the
    next master.  Stops when UB - LB <= eps, the time limit expires, or
    ``max_iterations`` is reached.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    start = time.perf_counter()
    paths = build_path_table(instance)
    pairs = sorted(paths.pairs())
    master, attack_cols, z_cols = _build_master(instance, pairs, use_valid_ineq)
    master_gap = min(1e-6, max(eps * 0.25, 1e-12))

    lower = 0.0
    upper = math.inf
    incumbent: AttackVector | None = None
    cuts_total = 0
    trace: list[TraceRow] = []
    cut_log: list[CutRecord] = []
    warm: np.ndarray | None = None
    status = STATUS_ITERATION_LIMIT
    iteration = 0

    while True:
        remaining = None
        if time_limit is not None:
            remaining = time_limit - (time.perf_counter() - start)
            if remaining <= 0.0:
                status = STATUS_TIME_LIMIT
                break
        iteration += 1
        res = solve_milp(master, gap=master_gap, time_limit=remaining, backend=backend, warm_start=warm)
        if res.status == STATUS_INFEASIBLE:
            raise MasterInfeasible("master rejected all attack vectors including v = 0")
        if res.status == STATUS_TIME_LIMIT or res.x is None:
            if res.bound is not None and math.isfinite(res.bound):
                lower = max(lower, min(res.bound, upper))
            status = STATUS_TIME_LIMIT
            break
        lower = max(lower, min(res.bound, res.objective))
        flags = attack_from_solution(attack_cols, res.x)
        values = pair_values(instance, paths, flags)
        candidate = math.fsum(values[pair] for pair in pairs)
        if candidate < upper - 1e-12:
            upper = candidate
            incumbent = flags

        done = upper - lower <= eps
        added = 0
        if not done:
            for pair in pairs:
                z_value = float(res.x[z_cols[pair]])
                slave_value = values[pair]
                if z_value < slave_value - 1e-9:
                    duals = analytic_dual(instance, paths.path(*pair), flags)
                    cut = cut_from_duals(duals, instance, paths.path(*pair))
                    cols = [z_cols[pair]] + [attack_cols[i] for i, _ in cut.coefficients]
                    coefs = [1.0] + [-c for _, c in cut.coefficients]
                    master.add_row(
                        f"cut{cuts_total + added}_{pair[0]}_{pair[1]}",
                        cols,
                        coefs,
                        GREATER_EQUAL,
                        cut.constant,
                    )
                    cut_log.append(
                        CutRecord(
                            iteration=iteration,
                            cut=cut,
                            master_flags=flags.flags,
                            master_z=z_value,
                            slave_value=slave_value,
                        )
                    )
                    added += 1
            if added == 0:
                # Every surrogate already matches its slave, so the master
                # value is exact; the remaining gap is solver tolerance.
                done = True
        cuts_total += added
        trace.append(
            TraceRow(
                iteration=iteration,
                lower_bound=lower,
                upper_bound=upper,
                cuts_added=added,
                cuts_total=cuts_total,
                elapsed=time.perf_counter() - start,
            )
        )
        if done:
            status = STATUS_OPTIMAL
            break
        if max_iterations is not None and iteration >= max_iterations:
            status = STATUS_ITERATION_LIMIT
            break
        warm = np.zeros(master.num_variables)
        for i, flag in enumerate(flags.flags):
            warm[attack_cols[i]] = flag
        for pair in pairs:
            warm[z_cols[pair]] = values[pair]

    return BendersResult(
        status=status,
        attack=incumbent,
        upper_bound=upper,
        lower_bound=lower,
        iterations=iteration,
        cuts_total=cuts_total,
        elapsed=time.perf_counter() - start,
        trace=tuple(trace),
        cuts=tuple(cut_log),
    )


def write_trace_csv(result: BendersResult, path) -> None:
    """Per-iteration bounds and cut counts in the documented column order."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_HEADER)
        for row in result.trace:
            writer.writerow(
                [
                    row.iteration,
                    f"{row.lower_bound:.9g}",
                    f"{row.upper_bound:.9g}",
                    row.cuts_added,
                    row.cuts_total,
                    f"{row.elapsed:.6f}",
                ]
            )
