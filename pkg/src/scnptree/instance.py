"""Core data model: tree instances, attack vectors, paths, and file I/O.

Node indices are 0-based contiguous integers.  Connection costs are kept
sparse: ``None`` means "all pairs cost 1", otherwise a mapping from ordered
pairs (i, j) with i < j to nonnegative floats, with unlisted pairs
defaulting to 1.  Instances and path tables are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class InstanceError(ValueError):
    """Base class for instance validation failures.

    ``report`` lists every violated invariant found during validation, not
    only the one the exception class refers to.
    """

    def __init__(self, message: str, report: list[str] | None = None):
        super().__init__(message)
        self.report = report if report is not None else [message]


class NotATree(InstanceError):
    """Edge set is not a spanning tree (wrong count, cycle, or disconnected)."""


class ProbabilityOutOfRange(InstanceError):
    """Some survival probability lies outside [0, 1]."""


class NonpositiveAttackCost(InstanceError):
    """Some attack cost is zero or negative."""


class NegativeConnectionCost(InstanceError):
    """Some pair connection cost is negative."""


class ParseError(ValueError):
    """Instance file is malformed; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


def normalize_pair(i: int, j: int) -> tuple[int, int]:
    """Order an unordered pair as (min, max)."""
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class TreeInstance:
    """A tree interdiction instance.

    Fields mirror the canonical file format: ``node_count`` (n), ``edges``
    (n-1 unordered pairs), per-node ``survival_prob`` and ``attack_cost``,
    sparse ``connection_cost`` (``None`` = unit), and the attack ``budget``.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    survival_prob: tuple[float, ...]
    attack_cost: tuple[float, ...]
    connection_cost: Mapping[tuple[int, int], float] | None
    budget: float

    def pair_cost(self, i: int, j: int) -> float:
        """Connection cost of the unordered pair (i, j)."""
        if self.connection_cost is None:
            return 1.0
        return self.connection_cost.get(normalize_pair(i, j), 1.0)

    def adjacency(self) -> list[list[int]]:
        """Sorted adjacency lists (recomputed; instances are immutable)."""
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for neighbors in adj:
            neighbors.sort()
        return adj

    def leaves(self) -> list[int]:
        """Nodes of degree exactly 1."""
        degree = [0] * self.node_count
        for u, v in self.edges:
            degree[u] += 1
            degree[v] += 1
        return [i for i in range(self.node_count) if degree[i] == 1]

    def total_connection_cost(self) -> float:
        """Sum of c_ij over all pairs: the objective with nothing attacked."""
        n = self.node_count
        total = n * (n - 1) / 2.0
        if self.connection_cost is not None:
            for cost in self.connection_cost.values():
                total += cost - 1.0
        return total


def make_instance(
    node_count: int,
    edges: Iterable[Sequence[int]],
    survival_prob: Iterable[float],
    attack_cost: Iterable[float],
    connection_cost: Mapping[tuple[int, int], float] | Iterable[Sequence[float]] | None,
    budget: float,
) -> TreeInstance:
    """Normalize raw fields into a validated TreeInstance."""
    edge_tuple = tuple(normalize_pair(int(u), int(v)) for u, v in edges)
    costs: dict[tuple[int, int], float] | None
    if connection_cost is None:
        costs = None
    elif isinstance(connection_cost, Mapping):
        costs = {normalize_pair(*k): float(v) for k, v in connection_cost.items()}
    else:
        costs = {normalize_pair(int(i), int(j)): float(c) for i, j, c in connection_cost}
    instance = TreeInstance(
        node_count=int(node_count),
        edges=edge_tuple,
        survival_prob=tuple(float(p) for p in survival_prob),
        attack_cost=tuple(float(k) for k in attack_cost),
        connection_cost=costs,
        budget=float(budget),
    )
    return validate(instance)


def validate(instance: TreeInstance) -> TreeInstance:
    """Return the instance iff every invariant holds.

    On failure raises the error class of the first violation; the exception's
    ``report`` attribute carries the full list of violations.
    """
    violations: list[tuple[type[InstanceError], str]] = []
    n = instance.node_count

    if n < 1:
        violations.append((NotATree, f"node_count must be >= 1, got {n}"))
    if len(instance.edges) != max(n - 1, 0):
        violations.append(
            (NotATree, f"expected {max(n - 1, 0)} edges for {n} nodes, got {len(instance.edges)}")
        )
    for u, v in instance.edges:
        if not (0 <= u < n and 0 <= v < n):
            violations.append((NotATree, f"edge ({u},{v}) references a node outside 0..{n - 1}"))
        elif u == v:
            violations.append((NotATree, f"self-loop at node {u}"))
    # Reachability check only makes sense once the edge list itself is sane.
    if not violations and n >= 1:
        seen = [False] * n
        seen[0] = True
        stack = [0]
        adj = instance.adjacency()
        while stack:
            node = stack.pop()
            for nxt in adj[node]:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
        if not all(seen):
            missing = [i for i in range(n) if not seen[i]]
            violations.append((NotATree, f"nodes {missing} unreachable from node 0"))

    if len(instance.survival_prob) != n:
        violations.append(
            (ProbabilityOutOfRange, f"survival_prob has {len(instance.survival_prob)} entries, expected {n}")
        )
    for i, p in enumerate(instance.survival_prob):
        if not (0.0 <= p <= 1.0) or math.isnan(p):
            violations.append((ProbabilityOutOfRange, f"p[{i}] = {p} outside [0, 1]"))

    if len(instance.attack_cost) != n:
        violations.append(
            (NonpositiveAttackCost, f"attack_cost has {len(instance.attack_cost)} entries, expected {n}")
        )
    for i, cost in enumerate(instance.attack_cost):
        if not cost > 0.0:
            violations.append((NonpositiveAttackCost, f"kappa[{i}] = {cost} is not positive"))

    if instance.connection_cost is not None:
        for (i, j), cost in instance.connection_cost.items():
            if not (0 <= i < j < n):
                violations.append(
                    (NegativeConnectionCost, f"connection cost pair ({i},{j}) is not an ordered node pair")
                )
            if cost < 0.0 or math.isnan(cost):
                violations.append((NegativeConnectionCost, f"c[{i},{j}] = {cost} is negative"))

    if instance.budget < 0.0 or math.isnan(instance.budget):
        violations.append((NonpositiveAttackCost, f"budget K = {instance.budget} is negative"))

    if violations:
        error_cls, message = violations[0]
        raise error_cls(message, report=[m for _, m in violations])
    return instance


@dataclass(frozen=True)
class PathTable:
    """All unique tree paths, plus the traversal order used to build them.

    ``paths`` maps each pair (i, j) with i < j to the node sequence from i
    to j inclusive.  ``preorder`` holds, per source node s, the DFS visit
    order as (node, parent) pairs covering every node except s itself;
    consumers can rebuild prefix products along paths in O(1) per step.
    """

    node_count: int
    paths: Mapping[tuple[int, int], tuple[int, ...]]
    preorder: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False)

    def path(self, i: int, j: int) -> tuple[int, ...]:
        """Node sequence of the unique i-j path, oriented from min(i,j)."""
        return self.paths[normalize_pair(i, j)]

    def pairs(self) -> Iterable[tuple[int, int]]:
        return self.paths.keys()


def build_path_table(instance: TreeInstance) -> PathTable:
    """Materialize every pairwise path with one DFS per source node."""
    n = instance.node_count
    adj = instance.adjacency()
    paths: dict[tuple[int, int], tuple[int, ...]] = {}
    preorder: list[tuple[tuple[int, int], ...]] = []

    for source in range(n):
        order: list[tuple[int, int]] = []
        parent = [-1] * n
        stack = [source]
        seen = [False] * n
        seen[source] = True
        while stack:
            node = stack.pop()
            if node != source:
                order.append((node, parent[node]))
            # Reversed push keeps the visit order ascending by neighbor index.
            for nxt in reversed(adj[node]):
                if not seen[nxt]:
                    seen[nxt] = True
                    parent[nxt] = node
                    stack.append(nxt)
        preorder.append(tuple(order))
        # Rebuild explicit sequences only for pairs this source owns (j > source).
        route: dict[int, tuple[int, ...]] = {source: (source,)}
        for node, par in order:
            route[node] = route[par] + (node,)
            if node > source:
                paths[(source, node)] = route[node]

    return PathTable(node_count=n, paths=paths, preorder=tuple(preorder))


@dataclass(frozen=True)
class AttackVector:
    """Binary attack decision per node."""

    flags: tuple[int, ...]

    def __post_init__(self):
        if any(v not in (0, 1) for v in self.flags):
            raise ValueError("attack flags must be 0 or 1")

    @classmethod
    def from_nodes(cls, nodes: Iterable[int], node_count: int) -> "AttackVector":
        flags = [0] * node_count
        for i in nodes:
            flags[i] = 1
        return cls(tuple(flags))

    @classmethod
    def empty(cls, node_count: int) -> "AttackVector":
        return cls((0,) * node_count)

    @property
    def attacked(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.flags) if v)

    def total_cost(self, instance: TreeInstance) -> float:
        return sum(instance.attack_cost[i] for i in self.attacked)

    def is_feasible(self, instance: TreeInstance, slack: float = 1e-9) -> bool:
        """Budget respected and no attack on a node that survives surely."""
        if any(instance.survival_prob[i] >= 1.0 for i in self.attacked):
            return False
        return self.total_cost(instance) <= instance.budget + slack


def read_instance(path) -> TreeInstance:
    """Read a canonical instance file and validate it."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top-level value must be an object")

    for key in ("n", "edges", "p", "kappa", "c", "K"):
        if key not in raw:
            raise ParseError(f"{path}: missing field '{key}'", field=key)

    cost_field = raw["c"]
    if cost_field == "unit":
        costs = None
    elif isinstance(cost_field, list):
        try:
            costs = {normalize_pair(int(i), int(j)): float(c) for i, j, c in cost_field}
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: entries of 'c' must be [i, j, cost] triples", field="c") from exc
    else:
        raise ParseError(f"{path}: 'c' must be \"unit\" or a list of triples", field="c")

    try:
        instance = TreeInstance(
            node_count=int(raw["n"]),
            edges=tuple(normalize_pair(int(u), int(v)) for u, v in raw["edges"]),
            survival_prob=tuple(float(p) for p in raw["p"]),
            attack_cost=tuple(float(k) for k in raw["kappa"]),
            connection_cost=costs,
            budget=float(raw["K"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{path}: malformed field value: {exc}") from exc
    return validate(instance)


def write_instance(instance: TreeInstance, path) -> None:
    """Write the canonical file format; identical instances yield identical bytes."""
    if instance.connection_cost is None:
        cost_field = "unit"
    else:
        cost_field = [[i, j, c] for (i, j), c in sorted(instance.connection_cost.items())]
    payload = {
        "n": instance.node_count,
        "edges": [list(edge) for edge in instance.edges],
        "p": list(instance.survival_prob),
        "kappa": list(instance.attack_cost),
        "c": cost_field,
        "K": instance.budget,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=1)
        handle.write("\n")
