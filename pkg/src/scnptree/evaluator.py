"""Ground-truth objective computation and brute-force search.

Three independent routes to the same quantity back every other module:
``objective_tree`` multiplies survival factors along tree paths,
``objective_scenarios`` enumerates the random outcomes of the attacked set
on an arbitrary graph, and ``exhaustive_solve`` minimizes over every
budget-feasible attack vector.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from scnptree.instance import AttackVector, PathTable, TreeInstance, build_path_table


class TooManyAttackedNodes(ValueError):
    """Scenario enumeration would exceed 2^25 outcomes."""


class InstanceTooLarge(ValueError):
    """Exhaustive search over attackable nodes would exceed 2^20 vectors."""


def objective_tree(instance: TreeInstance, paths: PathTable, attack: AttackVector) -> float:
    """Expected pairwise connectivity via per-path survival products.

    Each pair (i, j) contributes c_ij * prod over path nodes k of
    (1 - (1 - p_k) v_k).  Prefix products along the DFS order make this
    O(n) per source node.
    """
    n = instance.node_count
    factor = [1.0 - (1.0 - p) * v for p, v in zip(instance.survival_prob, attack.flags)]
    costs = instance.connection_cost
    prod = [0.0] * n
    per_source: list[float] = []
    for source in range(n - 1):
        prod[source] = factor[source]
        subtotal = 0.0
        if costs is None:
            for node, parent in paths.preorder[source]:
                value = prod[parent] * factor[node]
                prod[node] = value
                if node > source:
                    subtotal += value
        else:
            for node, parent in paths.preorder[source]:
                value = prod[parent] * factor[node]
                prod[node] = value
                if node > source:
                    subtotal += costs.get((source, node), 1.0) * value
        per_source.append(subtotal)
    return math.fsum(per_source)


def objective_scenarios(instance: TreeInstance, attack: AttackVector) -> float:
    """Expected pairwise connectivity by enumerating attacked-node outcomes.

    Unattacked nodes survive surely, so only the 2^|S| survival patterns of
    the attacked set S carry probability mass.  Components are rebuilt per
    outcome with union-find, so the routine is valid on any graph, not just
    trees.  Outcome contributions are accumulated with compensated
    summation.
    """
    attacked = list(attack.attacked)
    if len(attacked) > 25:
        raise TooManyAttackedNodes(f"{len(attacked)} attacked nodes; limit is 25")
    n = instance.node_count
    p = instance.survival_prob
    costs = instance.connection_cost

    total = 0.0
    compensation = 0.0
    for outcome in range(1 << len(attacked)):
        mass = 1.0
        alive = [True] * n
        for bit, node in enumerate(attacked):
            if outcome >> bit & 1:
                mass *= p[node]
            else:
                mass *= 1.0 - p[node]
                alive[node] = False
        if mass == 0.0:
            continue

        parent = list(range(n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in instance.edges:
            if alive[u] and alive[v]:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[ru] = rv

        if costs is None:
            sizes: dict[int, int] = {}
            for node in range(n):
                if alive[node]:
                    root = find(node)
                    sizes[root] = sizes.get(root, 0) + 1
            connectivity = sum(s * (s - 1) / 2.0 for s in sizes.values())
        else:
            alive_nodes = [node for node in range(n) if alive[node]]
            roots = {node: find(node) for node in alive_nodes}
            connectivity = 0.0
            for a_index, i in enumerate(alive_nodes):
                root_i = roots[i]
                for j in alive_nodes[a_index + 1 :]:
                    if roots[j] == root_i:
                        connectivity += costs.get((i, j), 1.0)

        term = mass * connectivity - compensation
        fresh = total + term
        compensation = (fresh - total) - term
        total = fresh
    return total


def feasible_attack_vectors(instance: TreeInstance, max_nodes: int = 20) -> Iterator[tuple[int, ...]]:
    """Yield every feasible attack flag tuple in lexicographic order.

    Feasible means within budget and never attacking a node with survival
    probability 1.  Only nodes with p < 1 are branched on, so instances
    whose attackable node count exceeds ``max_nodes`` are rejected.
    """
    n = instance.node_count
    attackable = [i for i in range(n) if instance.survival_prob[i] < 1.0]
    if len(attackable) > max_nodes:
        raise InstanceTooLarge(
            f"{len(attackable)} attackable nodes; exhaustive limit is {max_nodes}"
        )
    kappa = instance.attack_cost
    budget_slack = instance.budget + 1e-9
    flags = [0] * n

    def recurse(position: int, spent: float) -> Iterator[tuple[int, ...]]:
        if position == len(attackable):
            yield tuple(flags)
            return
        node = attackable[position]
        yield from recurse(position + 1, spent)
        cost = kappa[node]
        if spent + cost <= budget_slack:
            flags[node] = 1
            yield from recurse(position + 1, spent + cost)
            flags[node] = 0

    return recurse(0, 0.0)


def batch_objective(instance: TreeInstance, paths: PathTable, flag_rows: np.ndarray) -> np.ndarray:
    """Objective of many attack vectors at once; rows of 0/1 flags."""
    n = instance.node_count
    rows = np.asarray(flag_rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != n:
        raise ValueError(f"expected shape (batch, {n})")
    p = np.asarray(instance.survival_prob)
    factors = 1.0 - (1.0 - p)[None, :] * rows
    total = np.zeros(rows.shape[0])
    if n == 1:
        return total

    cost_matrix = None
    if instance.connection_cost is not None:
        cost_matrix = np.ones((n, n))
        for (i, j), c in instance.connection_cost.items():
            cost_matrix[i, j] = c
            cost_matrix[j, i] = c

    prod = np.empty_like(factors)
    for source in range(n - 1):
        prod[:, source] = factors[:, source]
        for node, parent in paths.preorder[source]:
            value = prod[:, parent] * factors[:, node]
            prod[:, node] = value
            if node > source:
                if cost_matrix is None:
                    total += value
                else:
                    total += cost_matrix[source, node] * value
    return total


def exhaustive_solve(
    instance: TreeInstance, paths: PathTable | None = None
) -> tuple[AttackVector, float]:
    """Minimize over every feasible attack vector.

    Enumeration skips nodes with p = 1, prunes on the budget, and breaks
    value ties by the lexicographically smallest flag tuple (the
    enumeration order), evaluating candidates in vectorized batches.
    """
    if paths is None:
        paths = build_path_table(instance)
    n = instance.node_count

    best_value = math.inf
    best_flags: tuple[int, ...] | None = None
    chunk: list[tuple[int, ...]] = []
    chunk_size = 16384

    def flush() -> None:
        nonlocal best_value, best_flags
        if not chunk:
            return
        values = batch_objective(instance, paths, np.array(chunk, dtype=float))
        index = int(np.argmin(values))
        if values[index] < best_value:
            best_value = float(values[index])
            best_flags = chunk[index]
        chunk.clear()

    for flags in feasible_attack_vectors(instance):
        chunk.append(flags)
        if len(chunk) >= chunk_size:
            flush()
    flush()

    assert best_flags is not None  # the empty attack is always feasible
    return AttackVector(best_flags), best_value
