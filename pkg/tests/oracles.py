"""Independent reference implementations used to validate the package.

Everything here is deliberately naive: direct enumeration and first
principles only, no shared code with the library beyond the instance
container.  Tests compare library outputs against these.
"""

from __future__ import annotations

import bisect
import itertools
from fractions import Fraction

from scnptree.instance import AttackVector, TreeInstance, make_instance


def prufer_to_edges(sequence: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    """Labeled tree on n = len(sequence) + 2 nodes from its Prufer code."""
    n = len(sequence) + 2
    degree = [1] * n
    for v in sequence:
        degree[v] += 1
    edges = []
    leaves = sorted(i for i in range(n) if degree[i] == 1)
    code = list(sequence)
    for v in code:
        leaf = leaves.pop(0)
        edges.append((min(leaf, v), max(leaf, v)))
        degree[v] -= 1
        if degree[v] == 1:
            # keep the leaf pool sorted so the smallest leaf goes first
            bisect.insort(leaves, v)
    u, v = leaves
    edges.append((min(u, v), max(u, v)))
    return tuple(sorted(edges))


def all_labeled_trees(n: int) -> list[tuple[tuple[int, int], ...]]:
    """Every labeled tree on n nodes, by enumerating Prufer codes."""
    if n == 1:
        return [()]
    if n == 2:
        return [((0, 1),)]
    return sorted(
        {prufer_to_edges(seq) for seq in itertools.product(range(n), repeat=n - 2)}
    )


def is_tree(node_count: int, edges) -> bool:
    """Connectivity + edge-count check by union-find."""
    if len(edges) != node_count - 1:
        return False
    parent = list(range(node_count))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def tree_paths(node_count: int, edges) -> dict[tuple[int, int], tuple[int, ...]]:
    """All pairwise paths by breadth-first search from every source."""
    adj = {i: [] for i in range(node_count)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    out: dict[tuple[int, int], tuple[int, ...]] = {}
    for s in range(node_count):
        prev = {s: None}
        queue = [s]
        while queue:
            cur = queue.pop(0)
            for nxt in adj[cur]:
                if nxt not in prev:
                    prev[nxt] = cur
                    queue.append(nxt)
        for t in range(s + 1, node_count):
            route = [t]
            while route[-1] != s:
                route.append(prev[route[-1]])
            out[(s, t)] = tuple(reversed(route))
    return out


def expected_pair_connectivity(instance: TreeInstance, flags) -> float:
    """Objective by direct summation of per-pair path survival products."""
    paths = tree_paths(instance.node_count, instance.edges)
    total = 0.0
    for (i, j), route in paths.items():
        prob = 1.0
        for k in route:
            if flags[k]:
                prob *= instance.survival_prob[k]
        total += instance.pair_cost(i, j) * prob
    return total


def expected_pair_connectivity_exact(instance: TreeInstance, flags) -> Fraction:
    """Same as above in exact rational arithmetic (probabilities as given)."""
    paths = tree_paths(instance.node_count, instance.edges)
    total = Fraction(0)
    for (i, j), route in paths.items():
        prob = Fraction(1)
        for k in route:
            if flags[k]:
                prob *= Fraction(instance.survival_prob[k])
        total += Fraction(instance.pair_cost(i, j)) * prob
    return total


def brute_force_optimum(instance: TreeInstance) -> tuple[tuple[int, ...], float]:
    """Minimize the objective over all feasible attack flag vectors."""
    n = instance.node_count
    attackable = [i for i in range(n) if instance.survival_prob[i] < 1.0]
    best_flags: tuple[int, ...] | None = None
    best_value = float("inf")
    for subset_bits in itertools.product((0, 1), repeat=len(attackable)):
        flags = [0] * n
        cost = 0.0
        for bit, node in zip(subset_bits, attackable):
            if bit:
                flags[node] = 1
                cost += instance.attack_cost[node]
        if cost > instance.budget + 1e-9:
            continue
        value = expected_pair_connectivity(instance, flags)
        key = tuple(flags)
        if value < best_value - 1e-15 or (
            abs(value - best_value) <= 1e-15 and (best_flags is None or key < best_flags)
        ):
            best_value = value
            best_flags = key
    assert best_flags is not None
    return best_flags, best_value


def knapsack_best_profit(items: list[tuple[float, float]], capacity: float) -> float:
    """Best 0/1 knapsack profit by subset enumeration."""
    best = 0.0
    for bits in itertools.product((0, 1), repeat=len(items)):
        weight = sum(b * w for b, (_, w) in zip(bits, items))
        if weight <= capacity + 1e-9:
            best = max(best, sum(b * p for b, (p, _) in zip(bits, items)))
    return best


def cedp_optimum(
    instance: TreeInstance,
    edge_survival: dict[tuple[int, int], float],
    edge_cost: dict[tuple[int, int], float],
) -> float:
    """Joint node-and-edge interdiction optimum by full enumeration.

    An attacked element keeps working with its survival probability; the
    value of an attack is the expected connection cost over original node
    pairs, each pair surviving iff all path nodes and path edges work.
    """
    n = instance.node_count
    edges = list(instance.edges)
    paths = tree_paths(n, edges)
    best = None
    node_pool = [i for i in range(n) if instance.survival_prob[i] < 1.0]
    edge_pool = [e for e in edges if edge_survival[e] < 1.0]
    for node_bits in itertools.product((0, 1), repeat=len(node_pool)):
        node_cost = sum(b * instance.attack_cost[i] for b, i in zip(node_bits, node_pool))
        if node_cost > instance.budget + 1e-9:
            continue
        attacked_nodes = {i for b, i in zip(node_bits, node_pool) if b}
        for edge_bits in itertools.product((0, 1), repeat=len(edge_pool)):
            cost = node_cost + sum(b * edge_cost[e] for b, e in zip(edge_bits, edge_pool))
            if cost > instance.budget + 1e-9:
                continue
            attacked_edges = {e for b, e in zip(edge_bits, edge_pool) if b}
            total = 0.0
            for (i, j), route in paths.items():
                prob = 1.0
                for k in route:
                    if k in attacked_nodes:
                        prob *= instance.survival_prob[k]
                for a, b in zip(route, route[1:]):
                    e = (a, b) if a < b else (b, a)
                    if e in attacked_edges:
                        prob *= edge_survival[e]
                total += instance.pair_cost(i, j) * prob
            if best is None or total < best:
                best = total
    assert best is not None
    return best


def edge_presence_objective(
    instance: TreeInstance,
    presence: dict[tuple[int, int], float],
    flags,
) -> float:
    """Expected connectivity when every edge exists independently.

    Node removal here is deterministic (an attacked node always falls,
    matching survival probability zero); the expectation runs over the
    2^(n-1) edge subsets.
    """
    edges = list(instance.edges)
    n = instance.node_count
    total = 0.0
    for present in itertools.product((0, 1), repeat=len(edges)):
        prob = 1.0
        for bit, e in zip(present, edges):
            prob *= presence[e] if bit else 1.0 - presence[e]
        if prob == 0.0:
            continue
        parent = list(range(n))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for bit, (u, v) in zip(present, edges):
            if bit and not flags[u] and not flags[v]:
                parent[find(u)] = find(v)
        value = 0.0
        for i in range(n):
            if flags[i]:
                continue
            for j in range(i + 1, n):
                if not flags[j] and find(i) == find(j):
                    value += instance.pair_cost(i, j)
        total += prob * value
    return total


def pair_slave_value(
    instance: TreeInstance, path: tuple[int, ...], flags
) -> float:
    """Value of one pair's slave at fixed flags, straight from the formula."""
    prob = 1.0
    for k in path:
        prob *= 1.0 - (1.0 - instance.survival_prob[k]) * flags[k]
    return instance.pair_cost(path[0], path[-1]) * prob


def random_tree_instance(rng, n: int, scheme: str = "unit", budget: float | None = None) -> TreeInstance:
    """Small random instance built from a random Prufer code.

    Independent of the package generator on purpose; used where tests need
    randomness that does not share code with the component under test.
    """
    if n == 1:
        edges: list[tuple[int, int]] = []
    elif n == 2:
        edges = [(0, 1)]
    else:
        seq = tuple(int(rng.integers(0, n)) for _ in range(n - 2))
        edges = list(prufer_to_edges(seq))
    p = [round(float(rng.uniform()), 2) for _ in range(n)]
    if scheme == "unit":
        kappa = [1.0] * n
        costs = None
    else:
        kappa = [float(rng.integers(1, 10)) for _ in range(n)]
        costs = [
            (i, j, float(rng.integers(1, 10)))
            for i in range(n)
            for j in range(i + 1, n)
        ]
    if budget is None:
        budget = float(max(1, int(0.3 * sum(kappa))))
    return make_instance(n, edges, p, kappa, costs, budget)


def attack_with_at_most(rng, instance: TreeInstance, max_attacked: int) -> AttackVector:
    """Random feasible attack flags touching at most ``max_attacked`` nodes."""
    n = instance.node_count
    flags = [0] * n
    spent = 0.0
    picked = 0
    for node in rng.permutation(n):
        node = int(node)
        if picked >= max_attacked:
            break
        if instance.survival_prob[node] >= 1.0:
            continue
        cost = instance.attack_cost[node]
        if spent + cost <= instance.budget + 1e-9 and rng.random() < 0.6:
            flags[node] = 1
            spent += cost
            picked += 1
    return AttackVector(tuple(flags))
