"""Exact solvers for the stochastic critical node problem on trees.

A tree instance carries per-node survival probabilities and attack costs,
per-pair connection costs, and an attack budget.  Attacking a node removes
it only with probability 1 - p_i; the objective is the expected total
connection cost over node pairs that remain joined.  The package provides
ground-truth evaluators, mixed-integer formulations, a Benders
decomposition with closed-form subproblems, a truncation-based dynamic
program for unit costs, and the constructive reductions used to relate the
problem to knapsack, element-wise interdiction, and deterministic node
deletion.
"""

from scnptree.benders import BendersResult, bd_scnp, write_trace_csv
from scnptree.dp import ApproxResult, NonUnitCosts, StateOverflow, dp_solve
from scnptree.evaluator import (
    InstanceTooLarge,
    batch_objective,
    exhaustive_solve,
    feasible_attack_vectors,
    objective_scenarios,
    objective_tree,
)
from scnptree.generator import SCHEMES, broder_tree, generate_instance, instance_filename
from scnptree.instance import (
    AttackVector,
    InstanceError,
    ParseError,
    PathTable,
    TreeInstance,
    build_path_table,
    make_instance,
    read_instance,
    validate,
    write_instance,
)
from scnptree.models import (
    UnequalProbabilities,
    build_chain_milp,
    build_ilp_p,
    valid_inequalities,
)
from scnptree.reductions import (
    cedp_to_scnp,
    edge_uncertainty_to_deterministic,
    knapsack_to_dscnp,
)

__all__ = [
    "ApproxResult",
    "AttackVector",
    "BendersResult",
    "InstanceError",
    "InstanceTooLarge",
    "NonUnitCosts",
    "ParseError",
    "PathTable",
    "SCHEMES",
    "StateOverflow",
    "TreeInstance",
    "UnequalProbabilities",
    "batch_objective",
    "bd_scnp",
    "broder_tree",
    "build_chain_milp",
    "build_ilp_p",
    "build_path_table",
    "cedp_to_scnp",
    "dp_solve",
    "edge_uncertainty_to_deterministic",
    "exhaustive_solve",
    "feasible_attack_vectors",
    "generate_instance",
    "instance_filename",
    "knapsack_to_dscnp",
    "make_instance",
    "objective_scenarios",
    "objective_tree",
    "read_instance",
    "valid_inequalities",
    "validate",
    "write_instance",
]

__version__ = "0.1.0"
