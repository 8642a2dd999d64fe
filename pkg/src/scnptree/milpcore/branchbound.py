"""Branch and bound over LP relaxations.

Branches on the most fractional integer variable, dives toward the child
containing the rounded LP value, and backtracks to the open node with the
best bound.  Terminates at a proven absolute gap: every discarded node had
an LP bound within ``gap`` of the incumbent, so the reported bound is never
more than ``gap`` below the returned objective.
"""

from __future__ import annotations

import heapq
import math
import time

import numpy as np

from scnptree.milpcore.backends import solve_lp
from scnptree.milpcore.model import (
    STATUS_INFEASIBLE,
    STATUS_ITERATION_LIMIT,
    STATUS_OPTIMAL,
    STATUS_TIME_LIMIT,
    STATUS_UNBOUNDED,
    LinearModel,
    NumericalFailure,
    SolveResult,
)

_INT_TOL = 1e-6
_PRUNE_PAD = 1e-9


def _validate_warm_start(model: LinearModel, x: np.ndarray) -> float:
    if x.shape != (model.num_variables,):
        raise ValueError("warm start has wrong length")
    for j in range(model.num_variables):
        if model.is_integer[j] and abs(x[j] - round(x[j])) > _INT_TOL:
            raise ValueError(f"warm start not integral on {model.var_names[j]}")
    if not model.is_feasible(x, tol=1e-7):
        raise ValueError("warm start violates bounds or rows")
    return model.objective_value(x)


def solve_milp(
    model: LinearModel,
    gap: float = 1e-3,
    time_limit: float | None = None,
    backend: str = "auto",
    warm_start: np.ndarray | None = None,
    node_limit: int | None = None,
) -> SolveResult:
    """Minimize the model with its integrality flags enforced.

    ``gap`` is absolute: the search stops once no open node can beat the
    incumbent by more than ``gap``.  ``warm_start`` must be a feasible
    integral point and seeds the incumbent.  Unbounded refers to the root
    relaxation.
    """
    start = time.perf_counter()
    incumbent_x: np.ndarray | None = None
    incumbent_obj = math.inf
    if warm_start is not None:
        ws = np.asarray(warm_start, dtype=float)
        incumbent_obj = _validate_warm_start(model, ws)
        incumbent_x = ws

    int_idx = [j for j in range(model.num_variables) if model.is_integer[j]]
    root_lower = np.asarray(model.lower, dtype=float)
    root_upper = np.asarray(model.upper, dtype=float)

    heap: list[tuple[float, int, np.ndarray, np.ndarray]] = []
    seq = 0
    pruned_bound = math.inf
    nodes = 0
    total_lp_iter = 0
    dive: tuple[float, np.ndarray, np.ndarray] | None = (-math.inf, root_lower, root_upper)
    timed_out = False
    interrupted_est: float | None = None

    def threshold() -> float:
        return incumbent_obj - gap + _PRUNE_PAD

    while True:
        if dive is not None:
            est, lo, hi = dive
            dive = None
        elif heap:
            est, _, lo, hi = heapq.heappop(heap)
        else:
            break
        if est >= threshold():
            pruned_bound = min(pruned_bound, est)
            continue
        if time_limit is not None and time.perf_counter() - start > time_limit:
            timed_out = True
            interrupted_est = est
            break
        if node_limit is not None and nodes >= node_limit:
            timed_out = False
            interrupted_est = est
            break

        remaining = None
        if time_limit is not None:
            remaining = max(time_limit - (time.perf_counter() - start), 1e-3)
        res = solve_lp(model, backend=backend, lower=lo, upper=hi, time_limit=remaining)
        nodes += 1
        total_lp_iter += res.iterations
        if res.status == STATUS_INFEASIBLE:
            continue
        if res.status == STATUS_UNBOUNDED:
            if nodes == 1:
                return SolveResult(status=STATUS_UNBOUNDED, nodes=nodes)
            raise NumericalFailure("child relaxation unbounded below a bounded parent")
        if res.status == STATUS_ITERATION_LIMIT:
            if time_limit is not None and time.perf_counter() - start > time_limit:
                timed_out = True
                interrupted_est = est
                break
            raise NumericalFailure("node relaxation hit the iteration limit")
        obj = res.objective
        if obj >= threshold():
            pruned_bound = min(pruned_bound, obj)
            continue

        x = res.x
        best_j = -1
        best_frac = _INT_TOL
        for j in int_idx:
            score = min(x[j] - math.floor(x[j]), math.ceil(x[j]) - x[j])
            if score > best_frac:
                best_frac = score
                best_j = j
        if best_j < 0:
            if obj < incumbent_obj - 1e-12:
                incumbent_obj = obj
                incumbent_x = x.copy()
            continue

        floor_v = math.floor(x[best_j])
        lo_floor, hi_floor = lo.copy(), hi.copy()
        hi_floor[best_j] = floor_v
        lo_ceil, hi_ceil = lo.copy(), hi.copy()
        lo_ceil[best_j] = floor_v + 1
        near_floor = (x[best_j] - floor_v) <= 0.5
        near = (obj, lo_floor, hi_floor) if near_floor else (obj, lo_ceil, hi_ceil)
        far = (obj, lo_ceil, hi_ceil) if near_floor else (obj, lo_floor, hi_floor)
        seq += 1
        heapq.heappush(heap, (far[0], seq, far[1], far[2]))
        dive = near

    open_bounds = [entry[0] for entry in heap]
    if interrupted_est is not None:
        open_bounds.append(interrupted_est)
    bound = min([incumbent_obj, pruned_bound, *open_bounds]) if (
        incumbent_x is not None or open_bounds or pruned_bound < math.inf
    ) else None

    if incumbent_x is None:
        if timed_out or interrupted_est is not None:
            status = STATUS_TIME_LIMIT if timed_out else STATUS_ITERATION_LIMIT
            return SolveResult(status=status, bound=bound, nodes=nodes, iterations=total_lp_iter)
        return SolveResult(status=STATUS_INFEASIBLE, nodes=nodes, iterations=total_lp_iter)
    status = STATUS_OPTIMAL
    if timed_out:
        status = STATUS_TIME_LIMIT
    elif interrupted_est is not None:
        status = STATUS_ITERATION_LIMIT
    return SolveResult(
        status=status,
        objective=incumbent_obj,
        x=incumbent_x,
        bound=bound,
        nodes=nodes,
        iterations=total_lp_iter,
    )
