"""blockswap: budget-constrained block replacement for computation graphs.

Enumerates single-input/single-output sub-networks of a DAG of layers,
assembles a house of compatible replacement blocks harvested from other
networks, searches for a replacement plan meeting a latency/FLOPs budget
with greedy-seeded simulated annealing, and rewrites the graph into the
induced student network.
"""

from .graph_ir import (
    CostVector,
    Layer,
    Network,
    SubNetwork,
    parse_network,
    serialize_network,
    subnetwork_from_layers,
    validate_network,
)
from .enumeration import brute_force_enumerate, enumerate_all, modified_dfs
from .model_house import (
    Alternative,
    ChannelMask,
    HouseParams,
    ModelHouse,
    apply_mask,
    construct,
    expand,
    is_compatible,
    subnet_sampling,
)
from .cost_profile import Profile, incremental_metric, score, synth_profile
from .search import (
    AnnealConfig,
    Solution,
    anneal,
    exhaustive_search,
    greedy_init,
    neighbor,
)
from .rewrite import apply_plan, render_dot, replace_subnetwork

__version__ = "0.1.0"

__all__ = [
    "Alternative",
    "AnnealConfig",
    "ChannelMask",
    "CostVector",
    "HouseParams",
    "Layer",
    "ModelHouse",
    "Network",
    "Profile",
    "Solution",
    "SubNetwork",
    "anneal",
    "apply_mask",
    "apply_plan",
    "brute_force_enumerate",
    "construct",
    "enumerate_all",
    "exhaustive_search",
    "expand",
    "greedy_init",
    "incremental_metric",
    "is_compatible",
    "modified_dfs",
    "neighbor",
    "parse_network",
    "render_dot",
    "replace_subnetwork",
    "score",
    "serialize_network",
    "subnet_sampling",
    "subnetwork_from_layers",
    "synth_profile",
    "validate_network",
]
