"""Linear formulations of the tree interdiction problem.

Two exact models over binary attack flags v_i:

- build_chain_milp: per path-position survival variables s and removal
  variables r linearize the product of per-node survival factors along
  every pair's path.  With prefix sharing enabled, all pairs starting at
  the same node reuse one variable per reachable node (the paths from a
  fixed start form a tree, so each position is a node).
- build_ilp_p: when every node has the same survival probability p, only
  the number of attacked nodes on a path matters; selector variables pick
  that count per pair.

Both attach the budget row; the chain model also fixes v_i = 0 where
p_i = 1 and optionally adds leaf dominance rows.
"""

from __future__ import annotations

from dataclasses import dataclass

from scnptree.instance import AttackVector, PathTable, TreeInstance
from scnptree.milpcore import EQUAL, GREATER_EQUAL, LESS_EQUAL, LinearModel


class UnequalProbabilities(ValueError):
    """The uniform-probability model needs identical survival probabilities."""


@dataclass(frozen=True)
class ChainIndex:
    """Column positions for a chain model.

    ``survival[(i, j)][k]`` is the column of the survival level after the
    path's (k+1)-th node; the last entry carries the pair's cost in the
    objective.  ``removal`` mirrors it with the per-position removal mass.
    """

    attack: tuple[int, ...]
    survival: dict[tuple[int, int], tuple[int, ...]]
    removal: dict[tuple[int, int], tuple[int, ...]]


@dataclass(frozen=True)
class SelectorIndex:
    """Column positions for the uniform-probability model."""

    attack: tuple[int, ...]
    selector: dict[tuple[int, int], tuple[int, ...]]


def valid_inequalities(instance: TreeInstance) -> tuple[tuple[int, int], ...]:
    """Leaf dominance pairs (i, j) meaning v_i <= v_j is safe to add.

    A leaf i with inner neighbor j that is no more likely to survive an
    attack and no more expensive dominates the leaf: any budget spent on i
    does at least as well on j.  At least one optimal solution satisfies
    all returned rows.
    """
    out: list[tuple[int, int]] = []
    leaves = set(instance.leaves())
    for i in sorted(leaves):
        j = instance.adjacency()[i][0]
        if j in leaves:
            continue
        if instance.survival_prob[j] <= instance.survival_prob[i] and (
            instance.attack_cost[j] <= instance.attack_cost[i]
        ):
            out.append((i, j))
    return tuple(out)


def _add_attack_block(
    model: LinearModel,
    instance: TreeInstance,
    fix_certain: bool,
    add_valid_ineq: bool,
) -> tuple[int, ...]:
    n = instance.node_count
    attack = tuple(
        model.add_variable(f"v{i}", lower=0.0, upper=1.0, integer=True) for i in range(n)
    )
    model.add_row(
        "budget",
        list(attack),
        list(instance.attack_cost),
        LESS_EQUAL,
        instance.budget,
    )
    if fix_certain:
        for i in range(n):
            if instance.survival_prob[i] >= 1.0:
                model.add_row(f"fix{i}", [attack[i]], [1.0], EQUAL, 0.0)
    if add_valid_ineq:
        for i, j in valid_inequalities(instance):
            model.add_row(f"dom_{i}_{j}", [attack[i], attack[j]], [1.0, -1.0], LESS_EQUAL, 0.0)
    return attack


def _chain_rows(
    model: LinearModel,
    instance: TreeInstance,
    attack: tuple[int, ...],
    node: int,
    s_var: int,
    r_var: int,
    prev_s: int | None,
    tag: str,
) -> None:
    """Rows tying one position's removal and survival to its predecessor."""
    q = 1.0 - instance.survival_prob[node]
    if prev_s is None:
        # First position: removal is exactly the attack's removal mass.
        model.add_row(f"rfix_{tag}", [r_var, attack[node]], [1.0, -q], EQUAL, 0.0)
        model.add_row(f"sdef_{tag}", [s_var, r_var], [1.0, 1.0], EQUAL, 1.0)
        return
    model.add_row(f"rcapv_{tag}", [r_var, attack[node]], [1.0, -q], LESS_EQUAL, 0.0)
    model.add_row(f"rcaps_{tag}", [r_var, prev_s], [1.0, -q], LESS_EQUAL, 0.0)
    model.add_row(
        f"rlink_{tag}",
        [r_var, prev_s, attack[node]],
        [1.0, -q, -q],
        GREATER_EQUAL,
        -q,
    )
    model.add_row(f"sbal_{tag}", [s_var, prev_s, r_var], [1.0, -1.0, 1.0], EQUAL, 0.0)


def build_chain_milp(
    instance: TreeInstance,
    paths: PathTable,
    share_prefixes: bool = False,
    add_valid_ineq: bool = False,
) -> tuple[LinearModel, ChainIndex]:
    """Exact model: minimize total expected pairwise connection cost.

    Each pair's path carries a survival level s that starts at 1 and drops
    by the removal mass r at every node; at binary attack flags the final
    level equals the product of per-node survival factors, so the optimum
    matches the exhaustive objective.  ``share_prefixes`` collapses each
    start node's paths into one variable set per reachable node, which
    shrinks the model without changing its optimal value or bound.
    """
    model = LinearModel("chain" + ("_shared" if share_prefixes else ""))
    attack = _add_attack_block(model, instance, fix_certain=True, add_valid_ineq=add_valid_ineq)
    survival: dict[tuple[int, int], tuple[int, ...]] = {}
    removal: dict[tuple[int, int], tuple[int, ...]] = {}

    if not share_prefixes:
        for i, j in paths.pairs():
            path = paths.path(i, j)
            cost = instance.pair_cost(i, j)
            s_cols: list[int] = []
            r_cols: list[int] = []
            for k, node in enumerate(path, start=1):
                obj = cost if k == len(path) else 0.0
                s_cols.append(model.add_variable(f"s_{i}_{j}_{k}", objective=obj))
                r_cols.append(model.add_variable(f"r_{i}_{j}_{k}"))
                prev = s_cols[-2] if k > 1 else None
                _chain_rows(model, instance, attack, node, s_cols[-1], r_cols[-1], prev, f"{i}_{j}_{k}")
            survival[(i, j)] = tuple(s_cols)
            removal[(i, j)] = tuple(r_cols)
        return model, ChainIndex(attack, survival, removal)

    adjacency = instance.adjacency()
    for source in range(instance.node_count):
        # Paths from one source form a tree; keep only branches that still
        # lead to a pair this source owns (targets above it).
        parent: dict[int, int] = {source: -1}
        order: list[int] = [source]
        stack = [source]
        while stack:
            u = stack.pop()
            for w in reversed(adjacency[u]):
                if w not in parent:
                    parent[w] = u
                    order.append(w)
                    stack.append(w)
        keep = {u: u > source for u in order}
        for u in reversed(order):
            if keep[u] and u != source:
                keep[parent[u]] = True
        if not keep[source]:
            continue
        s_at: dict[int, int] = {}
        r_at: dict[int, int] = {}
        for u in order:
            if not keep[u]:
                continue
            cost = instance.pair_cost(source, u) if u > source else 0.0
            s_at[u] = model.add_variable(f"s_{source}_{u}", objective=cost)
            r_at[u] = model.add_variable(f"r_{source}_{u}")
            prev = s_at[parent[u]] if u != source else None
            _chain_rows(model, instance, attack, u, s_at[u], r_at[u], prev, f"{source}_{u}")
        for target in range(source + 1, instance.node_count):
            path = paths.path(source, target)
            survival[(source, target)] = tuple(s_at[u] for u in path)
            removal[(source, target)] = tuple(r_at[u] for u in path)
    return model, ChainIndex(attack, survival, removal)


def build_ilp_p(
    instance: TreeInstance,
    paths: PathTable,
) -> tuple[LinearModel, SelectorIndex]:
    """Exact model for instances whose nodes share one survival probability.

    A pair that loses exactly t of its path nodes survives with probability
    p**t, so binary selectors y_t per pair pick the attacked count and the
    objective reads the corresponding power of p.  The count is capped by
    the path length and by how many attacks the budget can ever buy.
    """
    probs = set(instance.survival_prob)
    if len(probs) > 1:
        raise UnequalProbabilities(
            f"survival probabilities must all match; found {len(probs)} distinct values"
        )
    p = instance.survival_prob[0]
    max_attacks = int(instance.budget / min(instance.attack_cost) + 1e-9)

    model = LinearModel("uniform_p")
    attack = _add_attack_block(model, instance, fix_certain=False, add_valid_ineq=False)
    selector: dict[tuple[int, int], tuple[int, ...]] = {}
    for i, j in paths.pairs():
        path = paths.path(i, j)
        cost = instance.pair_cost(i, j)
        cap = min(max_attacks, len(path))
        y_cols = tuple(
            model.add_variable(
                f"y_{i}_{j}_{t}",
                lower=0.0,
                upper=1.0,
                objective=cost * p**t,
                integer=True,
            )
            for t in range(cap + 1)
        )
        model.add_row(f"pick_{i}_{j}", list(y_cols), [1.0] * len(y_cols), EQUAL, 1.0)
        model.add_row(
            f"count_{i}_{j}",
            list(y_cols) + [attack[u] for u in path],
            [float(t) for t in range(cap + 1)] + [-1.0] * len(path),
            EQUAL,
            0.0,
        )
        selector[(i, j)] = y_cols
    return model, SelectorIndex(attack, selector)


def attack_from_solution(attack_cols: tuple[int, ...], x) -> AttackVector:
    """Round the attack columns of a solver point into an attack vector."""
    flags = tuple(1 if round(float(x[c])) >= 1 else 0 for c in attack_cols)
    return AttackVector(flags)


def model_size(model: LinearModel) -> dict[str, int]:
    """Small summary used by reports and logs."""
    nnz = sum(len(cols) for cols in model.row_cols)
    integers = sum(model.is_integer)
    return {
        "variables": model.num_variables,
        "integer_variables": int(integers),
        "rows": model.num_rows,
        "nonzeros": nnz,
    }


def chain_survival_value(index: ChainIndex, pair: tuple[int, int], x) -> float:
    """Final survival level of a pair in a solved chain model."""
    return float(x[index.survival[pair][-1]])
