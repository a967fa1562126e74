"""SISO sub-network enumeration.

The traversal is a depth-first search that only pushes a layer once all of
its inbound layers have been popped. A closure event fires at a pop whose
popped prefix forms a SISO region; the singleton-stack test alone admits a
false positive on diamond-shaped graphs, so two extra guards apply: no
partially-satisfied visit counters may remain on not-yet-pushed layers
(``pending_out``), and the candidate set is re-verified with the boundary
predicate from :mod:`blockswap.graph_ir`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import NotSISO, InconsistentSpatial, StartNotSingleInput, TooLarge
from .graph_ir import Network, SubNetwork, subnetwork_from_layers


@dataclass
class TraversalState:
    """Mutable state of one modified-DFS run."""

    stack: list[str] = field(default_factory=list)
    delta: dict[str, int] = field(default_factory=dict)
    popped: list[str] = field(default_factory=list)
    pending_out: int = 0


@dataclass(frozen=True)
class ClosurePair:
    output_layer: str
    member_ids: frozenset[str]
    pop_index: int


def modified_dfs(
    net: Network,
    start: str,
    verify: bool = True,
    neighbor_rotation: int = 0,
    strengthened: bool = True,
) -> list[ClosurePair]:
    """Run the modified DFS from ``start`` and return closure pairs in pop
    order.

    ``neighbor_rotation`` rotates every successor list by that many
    positions away from the canonical lexicographic order; the default 0 is
    the canonical traversal. With ``verify`` (default) each candidate is
    checked against the SISO boundary predicate before emission.

    ``strengthened=False`` drops the ``pending_out`` guard and the
    re-verification, leaving only the singleton-stack test; that weaker
    condition emits invalid candidates on diamond-shaped graphs and exists
    solely so tests can document the gap.
    """
    if start not in net.layers:
        raise KeyError(f"unknown start layer {start!r}")
    if net.inbound_count(start) > 1:
        raise StartNotSingleInput(
            f"layer {start} has {net.inbound_count(start)} inbound connections"
        )

    state = TraversalState(stack=[start], delta={lid: 0 for lid in net.layers})
    pushed = {start}
    pairs: list[ClosurePair] = []

    while state.stack:
        singleton = len(state.stack) == 1
        v = state.stack.pop()
        members = frozenset(state.popped) | {v}
        if singleton and (not strengthened or state.pending_out == 0):
            ok = True
            if strengthened and verify:
                try:
                    subnetwork_from_layers(net, members)
                except (NotSISO, InconsistentSpatial):
                    ok = False
            if ok:
                pairs.append(
                    ClosurePair(
                        output_layer=v,
                        member_ids=members,
                        pop_index=len(state.popped),
                    )
                )
        state.popped.append(v)

        succ = net.successors(v)
        if neighbor_rotation and succ:
            k = neighbor_rotation % len(succ)
            succ = succ[k:] + succ[:k]
        for u in succ:
            state.delta[u] += 1
            if u not in pushed:
                state.pending_out += 1
            if state.delta[u] == len(net.predecessors(u)) and u not in pushed:
                state.stack.append(u)
                pushed.add(u)
                state.pending_out -= state.delta[u]
    return pairs


def eligible_starts(net: Network) -> list[str]:
    return sorted(lid for lid in net.layers if net.inbound_count(lid) <= 1)


def enumerate_all(net: Network, all_orders: bool = False) -> set[SubNetwork]:
    """Union of modified-DFS closures over every eligible start layer,
    deduplicated by member-id set.

    ``all_orders`` additionally unions results over rotated neighbor
    orders; kept as a fallback in case canonical-order completeness is ever
    observed to fail, default off.
    """
    found: set[SubNetwork] = set()
    max_fanout = max((len(net.successors(l)) for l in net.layers), default=1)
    rotations = range(max_fanout) if all_orders else (0,)
    for start in eligible_starts(net):
        for rot in rotations:
            for pair in modified_dfs(net, start, neighbor_rotation=rot):
                found.add(subnetwork_from_layers(net, pair.member_ids))
    return found


def _weakly_connected(net: Network, ids: frozenset[str]) -> bool:
    if not ids:
        return False
    seen = set()
    stack = [next(iter(ids))]
    while stack:
        lid = stack.pop()
        if lid in seen:
            continue
        seen.add(lid)
        for nb in net.successors(lid) + net.predecessors(lid):
            if nb in ids and nb not in seen:
                stack.append(nb)
    return seen == ids


def brute_force_enumerate(net: Network, cap: int = 14) -> set[SubNetwork]:
    """Test every nonempty connected layer subset against the SISO
    predicate; oracle for :func:`enumerate_all`, capped for tractability."""
    n = len(net.layers)
    if n > cap:
        raise TooLarge(f"{n} layers exceeds the brute-force cap {cap}")
    ids = sorted(net.layers)
    found: set[SubNetwork] = set()
    for size in range(1, n + 1):
        for combo in combinations(ids, size):
            subset = frozenset(combo)
            if not _weakly_connected(net, subset):
                continue
            try:
                found.add(subnetwork_from_layers(net, subset))
            except (NotSISO, InconsistentSpatial):
                continue
    return found
