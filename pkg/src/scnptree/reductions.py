"""Constructive transformations between problem variants.

Three pure builders: a knapsack decision gadget (hardness construction
reused as a test oracle), edge splitting that folds edge attacks into node
attacks, and the elimination of independent edge-presence uncertainty into
deterministic connection costs.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from scnptree.instance import TreeInstance, build_path_table, make_instance, normalize_pair


def knapsack_to_dscnp(
    items: Sequence[tuple[float, float]],
    capacity: float,
    target: float,
) -> tuple[TreeInstance, float]:
    """Star-of-paths gadget whose optimum decides a knapsack instance.

    ``items`` are (profit, weight) pairs.  Node layout: root 0 with p = 0
    and unit attack cost, intermediates 1..n with p = 1, and leaf n+i for
    item i with attack cost w_i and survival probability 1 - profit_i/max
    profit.  With budget capacity+1, attacking the root plus a set of
    leaves is optimal, and the objective dips to the returned threshold or
    below exactly when some feasible item set reaches the target profit.
    """
    if not items:
        raise ValueError("need at least one item")
    for profit, weight in items:
        if profit <= 0 or weight <= 0:
            raise ValueError("profits and weights must be positive")
    n = len(items)
    top_profit = max(profit for profit, _ in items)

    edges = [(0, i) for i in range(1, n + 1)]
    edges += [(i, n + i) for i in range(1, n + 1)]
    survival = [0.0] + [1.0] * n + [1.0 - profit / top_profit for profit, _ in items]
    attack_cost = [1.0] * (n + 1) + [float(weight) for _, weight in items]
    instance = make_instance(
        node_count=2 * n + 1,
        edges=edges,
        survival_prob=survival,
        attack_cost=attack_cost,
        connection_cost=None,
        budget=float(capacity) + 1.0,
    )
    threshold = n - target / top_profit
    return instance, threshold


def cedp_to_scnp(
    instance: TreeInstance,
    edge_survival_prob: Mapping[tuple[int, int], float],
    edge_attack_cost: Mapping[tuple[int, int], float],
) -> TreeInstance:
    """Fold attackable edges into attackable nodes by splitting every edge.

    Edge number e of the instance becomes node n+e carrying the edge's
    survival probability and attack cost.  Pairs of original nodes keep
    their connection costs; every pair touching a split node gets an
    explicit zero cost so the objective still counts original pairs only.
    The budget is unchanged.
    """
    n = instance.node_count
    edge_p = {normalize_pair(*k): float(v) for k, v in edge_survival_prob.items()}
    edge_k = {normalize_pair(*k): float(v) for k, v in edge_attack_cost.items()}
    for edge in instance.edges:
        if edge not in edge_p:
            raise ValueError(f"missing survival probability for edge {edge}")
        if edge not in edge_k:
            raise ValueError(f"missing attack cost for edge {edge}")

    new_edges: list[tuple[int, int]] = []
    survival = list(instance.survival_prob)
    attack_cost = list(instance.attack_cost)
    for position, (u, v) in enumerate(instance.edges):
        split = n + position
        new_edges.append((u, split))
        new_edges.append((split, v))
        survival.append(edge_p[(u, v)])
        attack_cost.append(edge_k[(u, v)])

    total = 2 * n - 1
    costs: dict[tuple[int, int], float] = {}
    if instance.connection_cost is not None:
        costs.update(instance.connection_cost)
    for i in range(total):
        for j in range(max(i + 1, n), total):
            costs[(i, j)] = 0.0
    return make_instance(
        node_count=total,
        edges=new_edges,
        survival_prob=survival,
        attack_cost=attack_cost,
        connection_cost=costs,
        budget=instance.budget,
    )


def edge_uncertainty_to_deterministic(
    instance: TreeInstance,
    edge_presence_prob: Mapping[tuple[int, int], float],
) -> TreeInstance:
    """Bake independent edge-presence probabilities into the pair costs.

    A pair is connected only when every edge on its path is present, so
    scaling each pair cost by the product of its path's presence
    probabilities yields a deterministic instance (all survival
    probabilities zero) with the same expected objective for every attack
    set.
    """
    presence = {normalize_pair(*k): float(v) for k, v in edge_presence_prob.items()}
    for edge in instance.edges:
        if edge not in presence:
            raise ValueError(f"missing presence probability for edge {edge}")
        if not 0.0 <= presence[edge] <= 1.0:
            raise ValueError(f"presence probability for edge {edge} outside [0, 1]")

    paths = build_path_table(instance)
    costs: dict[tuple[int, int], float] = {}
    for (i, j), path in paths.paths.items():
        scale = 1.0
        for u, v in zip(path, path[1:]):
            scale *= presence[normalize_pair(u, v)]
        costs[(i, j)] = instance.pair_cost(i, j) * scale
    return make_instance(
        node_count=instance.node_count,
        edges=instance.edges,
        survival_prob=[0.0] * instance.node_count,
        attack_cost=instance.attack_cost,
        connection_cost=costs,
        budget=instance.budget,
    )
