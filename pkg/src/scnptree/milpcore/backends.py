"""LP backend routing: the built-in simplex or HiGHS through scipy.

Both backends return the same SolveResult contract, including row duals in
the shared sign convention (<= rows nonpositive, >= rows nonnegative).
``auto`` picks the built-in simplex for small models and HiGHS beyond a
dense-size threshold.
"""

from __future__ import annotations

import math
import weakref

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from scnptree.milpcore.model import (
    EQUAL,
    GREATER_EQUAL,
    LESS_EQUAL,
    STATUS_INFEASIBLE,
    STATUS_ITERATION_LIMIT,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    LinearModel,
    NumericalFailure,
    SolveResult,
)
from scnptree.milpcore.simplex import simplex_solve

BACKENDS = ("auto", "simplex", "highs")

# auto routes to the dense simplex while rows * (cols + 2 rows) stays below
# this; larger models go to HiGHS.  Measured crossover: the dense basis
# updates stop being competitive past roughly a hundred rows.
AUTO_DENSE_CELL_LIMIT = 30_000

# Keyed by the model object itself (weakly, so entries die with the model
# and a recycled address can never be mistaken for a cached model); the
# revision guards against in-place mutation.
_highs_cache: "weakref.WeakKeyDictionary[LinearModel, tuple[int, dict]]" = (
    weakref.WeakKeyDictionary()
)


def resolve_backend(model: LinearModel, backend: str) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if backend != "auto":
        return backend
    m, n = model.num_rows, model.num_variables
    return "simplex" if m * (n + 2 * m) <= AUTO_DENSE_CELL_LIMIT else "highs"


def _highs_arrays(model: LinearModel) -> dict:
    """Split rows into <= and = blocks for linprog, >= rows negated."""
    cached = _highs_cache.get(model)
    if cached is not None and cached[0] == model.revision:
        return cached[1]
    ub_rows: list[int] = []
    ub_sign: list[float] = []
    eq_rows: list[int] = []
    for r, sense in enumerate(model.senses):
        if sense == EQUAL:
            eq_rows.append(r)
        else:
            ub_rows.append(r)
            ub_sign.append(1.0 if sense == LESS_EQUAL else -1.0)

    def block(rows: list[int], signs: list[float] | None) -> tuple:
        data: list[float] = []
        indices: list[int] = []
        indptr = [0]
        rhs = []
        for k, r in enumerate(rows):
            s = 1.0 if signs is None else signs[k]
            indices.extend(model.row_cols[r])
            data.extend(s * v for v in model.row_coefs[r])
            indptr.append(len(indices))
            rhs.append(s * model.rhs[r])
        mat = sp.csr_matrix(
            (data, indices, indptr), shape=(len(rows), model.num_variables)
        )
        return mat, np.array(rhs)

    a_ub, b_ub = block(ub_rows, ub_sign)
    a_eq, b_eq = block(eq_rows, None)
    built = {
        "ub_rows": ub_rows,
        "ub_sign": ub_sign,
        "eq_rows": eq_rows,
        "a_ub": a_ub,
        "b_ub": b_ub,
        "a_eq": a_eq,
        "b_eq": b_eq,
        "c": np.array(model.objective, dtype=float),
    }
    _highs_cache[model] = (model.revision, built)
    return built


def _highs_solve(
    model: LinearModel,
    lower: np.ndarray | None,
    upper: np.ndarray | None,
    time_limit: float | None,
) -> SolveResult:
    arrays = _highs_arrays(model)
    lo = np.asarray(model.lower if lower is None else lower, dtype=float)
    hi = np.asarray(model.upper if upper is None else upper, dtype=float)
    bounds = [
        (None if math.isinf(l) else l, None if math.isinf(u) else u)
        for l, u in zip(lo, hi)
    ]
    options = {}
    if time_limit is not None:
        options["time_limit"] = max(float(time_limit), 1e-3)
    res = linprog(
        arrays["c"],
        A_ub=arrays["a_ub"] if arrays["ub_rows"] else None,
        b_ub=arrays["b_ub"] if arrays["ub_rows"] else None,
        A_eq=arrays["a_eq"] if arrays["eq_rows"] else None,
        b_eq=arrays["b_eq"] if arrays["eq_rows"] else None,
        bounds=bounds,
        method="highs",
        options=options,
    )
    if res.status == 2:
        return SolveResult(status=STATUS_INFEASIBLE, iterations=int(res.nit))
    if res.status == 3:
        return SolveResult(status=STATUS_UNBOUNDED, iterations=int(res.nit))
    if res.status == 1:
        return SolveResult(status=STATUS_ITERATION_LIMIT, iterations=int(res.nit))
    if res.status != 0:
        raise NumericalFailure(f"highs backend failed: {res.message}")
    duals = np.zeros(model.num_rows)
    if arrays["ub_rows"]:
        marg = np.asarray(res.ineqlin.marginals, dtype=float)
        for k, r in enumerate(arrays["ub_rows"]):
            duals[r] = arrays["ub_sign"][k] * marg[k]
    if arrays["eq_rows"]:
        marg = np.asarray(res.eqlin.marginals, dtype=float)
        for k, r in enumerate(arrays["eq_rows"]):
            duals[r] = marg[k]
    x = np.asarray(res.x, dtype=float)
    objective = float(res.fun)
    return SolveResult(
        status=STATUS_OPTIMAL,
        objective=objective,
        x=x,
        duals=duals,
        bound=objective,
        iterations=int(res.nit),
    )


def solve_lp(
    model: LinearModel,
    backend: str = "auto",
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
    time_limit: float | None = None,
    max_iterations: int | None = None,
) -> SolveResult:
    """Solve the continuous relaxation; integrality flags are ignored.

    The built-in simplex ignores ``time_limit`` (its models are small by the
    auto routing rule); HiGHS ignores ``max_iterations``.
    """
    chosen = resolve_backend(model, backend)
    if chosen == "simplex":
        return simplex_solve(model, max_iterations=max_iterations, lower=lower, upper=upper)
    return _highs_solve(model, lower, upper, time_limit)
