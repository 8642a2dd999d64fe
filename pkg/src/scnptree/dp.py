"""Truncated dynamic program over rooted trees with unit costs.

States live per node: (attacks used in the subtree, whether the subtree
root itself is attacked) maps sparsely to scaled values, where ``c`` is
mu times the expected number of connections from the subtree root into its
subtree and the stored value is mu times the expected connected pairs
inside the subtree.  Children fold in right to left; each of the four
cross-connection terms of a merge is floored at the scale, so the final
value never exceeds the exact objective and undershoots it by at most
n(n-1)/(2 mu).

All arithmetic is integer: probabilities are expressed over one common
denominator (100 when every probability has two decimals, otherwise the
exact binary denominators), which keeps the floor operations exact.  A
naive float implementation misrounds cases like 100 * 0.7 * 0.2, whose
float product sits just below 14.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scnptree.evaluator import objective_tree
from scnptree.instance import AttackVector, TreeInstance, build_path_table


class NonUnitCosts(ValueError):
    """The dynamic program requires unit connection and attack costs."""


class StateOverflow(RuntimeError):
    """The state space bound n*n*K*mu exceeds the configured cap."""


@dataclass(frozen=True)
class ApproxResult:
    """Truncated optimum plus the exact value of the recovered attack set.

    ``truncated_value <= OPT <= exact_value <= truncated_value + slack_bound``
    with ``slack_bound = n(n-1)/(2 mu)``.
    """

    truncated_value: float
    attack: AttackVector
    exact_value: float
    slack_bound: float
    state_count: int
    transition_count: int


# A table maps (attacks_used, root_attacked) to {scaled_connections:
# (scaled_value, back)}; ``back`` is None for base states, else a pair of
# child/rest state keys (attacks, flag, connections) for backtracking.
_Table = dict[tuple[int, int], dict[int, tuple[int, object]]]


def _require_unit_costs(instance: TreeInstance) -> None:
    if any(k != 1.0 for k in instance.attack_cost):
        raise NonUnitCosts("attack costs must all equal 1")
    if instance.connection_cost is not None and any(
        c != 1.0 for c in instance.connection_cost.values()
    ):
        raise NonUnitCosts("connection costs must all equal 1")


def _scaled_probabilities(instance: TreeInstance) -> tuple[list[int], int]:
    """Exact integer numerators over one common denominator."""
    fracs: list[Fraction] = []
    for p in instance.survival_prob:
        snapped = round(p * 100)
        if abs(p * 100 - snapped) <= 1e-9:
            fracs.append(Fraction(snapped, 100))
        else:
            fracs.append(Fraction(p))
    den = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    return [int(f * den) for f in fracs], den


def _rooted_children(instance: TreeInstance, root: int) -> tuple[list[list[int]], list[int]]:
    adjacency = instance.adjacency()
    children: list[list[int]] = [[] for _ in range(instance.node_count)]
    postorder: list[int] = []
    seen = [False] * instance.node_count
    seen[root] = True
    stack: list[tuple[int, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            postorder.append(node)
            continue
        stack.append((node, True))
        for nxt in reversed(adjacency[node]):
            if not seen[nxt]:
                seen[nxt] = True
                children[node].append(nxt)
                stack.append((nxt, False))
    return children, postorder


def _prune(table: _Table) -> int:
    """Keep, per (attacks, flag), only value-minimal states as c grows."""
    kept = 0
    for key, states in table.items():
        best = None
        reduced: dict[int, tuple[int, object]] = {}
        for c in sorted(states):
            value, back = states[c]
            if best is None or value < best:
                reduced[c] = (value, back)
                best = value
        table[key] = reduced
        kept += len(reduced)
    return kept


def dp_solve(
    instance: TreeInstance,
    max_attacks: int,
    nu: int,
    root: int = 0,
    state_cap: int = 1_000_000_000,
    literal_advance: bool = False,
) -> ApproxResult:
    """Minimize expected connected pairs with at most ``max_attacks`` hits.

    ``nu`` sets the truncation scale mu = 10**nu.  ``literal_advance``
    switches the connection advance of non-final child merges to read the
    next sibling's probability instead of the merged child's own; it exists
    only so tests can compare the two readings and is off everywhere else.
    """
    _require_unit_costs(instance)
    if max_attacks < 0:
        raise ValueError("max_attacks must be >= 0")
    if nu < 1:
        raise ValueError("nu must be >= 1")
    if root not in range(instance.node_count):
        raise ValueError(f"root {root} out of range")
    n = instance.node_count
    budget = int(max_attacks)
    mu = 10**nu
    if n * n * budget * mu > state_cap:
        raise StateOverflow(
            f"state bound n*n*K*mu = {n * n * budget * mu} exceeds cap {state_cap}"
        )

    numerators, den = _scaled_probabilities(instance)
    den_sq = den * den
    children, postorder = _rooted_children(instance, root)

    def base_table() -> _Table:
        table: _Table = {(0, 0): {0: (0, None)}}
        if budget >= 1:
            table[(1, 1)] = {0: (0, None)}
        return table

    state_count = 0
    transition_count = 0
    # levels[node][i] = table after folding children[node][i:]; the last
    # level is the node alone, level 0 is the finished subtree table.
    levels: dict[int, list[_Table]] = {}

    for node in postorder:
        kids = children[node]
        node_levels: list[_Table] = [base_table()]
        state_count += sum(len(states) for states in node_levels[0].values())
        for position in range(len(kids) - 1, -1, -1):
            child = kids[position]
            child_table = levels[child][0]
            rest_table = node_levels[-1]
            advance = child
            if literal_advance and position + 1 < len(kids):
                advance = kids[position + 1]
            merged: _Table = {}
            for (rest_attacks, flag), rest_states in sorted(rest_table.items()):
                q_node = numerators[node] if flag else den
                for (child_attacks, child_flag), child_states in sorted(child_table.items()):
                    attacks = rest_attacks + child_attacks
                    if attacks > budget:
                        continue
                    q_child = numerators[child] if child_flag else den
                    q_advance = numerators[advance] if child_flag else den
                    t1 = mu * q_node * q_child // den_sq
                    t1_advance = mu * q_node * q_advance // den_sq
                    slot = merged.setdefault((attacks, flag), {})
                    for c_child, (val_child, _) in sorted(child_states.items()):
                        t3 = q_node * c_child // den
                        for c_rest, (val_rest, _) in sorted(rest_states.items()):
                            transition_count += 1
                            t2 = q_child * c_rest // den
                            t4 = c_child * c_rest // mu
                            c_new = c_rest + t1_advance + t3
                            val_new = val_child + val_rest + t1 + t2 + t3 + t4
                            known = slot.get(c_new)
                            if known is None or val_new < known[0]:
                                slot[c_new] = (
                                    val_new,
                                    (
                                        (child_attacks, child_flag, c_child),
                                        (rest_attacks, flag, c_rest),
                                    ),
                                )
            state_count += _prune(merged)
            node_levels.append(merged)
        node_levels.reverse()
        levels[node] = node_levels

    root_table = levels[root][0]
    best: tuple[int, int, int, int] | None = None
    for (attacks, flag), states in sorted(root_table.items()):
        for c, (value, _) in sorted(states.items()):
            key = (value, attacks, flag, c)
            if best is None or key < best:
                best = key
    assert best is not None
    best_value, best_attacks, best_flag, best_c = best

    attacked: list[int] = []
    stack: list[tuple[int, int, tuple[int, int], int]] = [
        (root, 0, (best_attacks, best_flag), best_c)
    ]
    while stack:
        node, level_index, key, c = stack.pop()
        value, back = levels[node][level_index][key][c]
        if back is None:
            if key[1] == 1:
                attacked.append(node)
            continue
        child_state, rest_state = back
        child = children[node][level_index]
        stack.append((child, 0, (child_state[0], child_state[1]), child_state[2]))
        stack.append((node, level_index + 1, (rest_state[0], rest_state[1]), rest_state[2]))

    attack = AttackVector.from_nodes(attacked, n)
    exact = objective_tree(instance, build_path_table(instance), attack)
    return ApproxResult(
        truncated_value=best_value / mu,
        attack=attack,
        exact_value=exact,
        slack_bound=n * (n - 1) / (2.0 * mu),
        state_count=state_count,
        transition_count=transition_count,
    )
