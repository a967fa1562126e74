"""Splicing chosen alternatives into the teacher graph.

Replacement removes the target region, copies the alternative's layers in
under fresh namespaced ids, and reconnects the single inbound boundary
edge plus every outbound boundary edge. Masked boundary channels are
rewritten so the student always validates.
"""

from __future__ import annotations

import math
from dataclasses import replace as dc_replace
from fractions import Fraction
from typing import Optional

from .errors import BoundaryMismatch, TargetNotIntact
from .graph_ir import (
    Layer,
    Network,
    NotSISO,
    SubNetwork,
    siso_boundary,
    topological_order,
    validate_network,
)
from .model_house import Alternative, ModelHouse, effective_subnet


def _boundary_of(net: Network, target: SubNetwork) -> tuple[str, str]:
    missing = target.layer_ids - set(net.layers)
    if missing:
        raise TargetNotIntact(f"missing layers {sorted(missing)}")
    try:
        input_layer, output_layer = siso_boundary(net, target.layer_ids)
    except NotSISO as exc:
        raise TargetNotIntact(f"boundary no longer SISO: {exc}") from exc
    if input_layer != target.input_layer or output_layer != target.output_layer:
        raise TargetNotIntact(
            f"boundary moved: {input_layer}/{output_layer} vs "
            f"{target.input_layer}/{target.output_layer}"
        )
    return input_layer, output_layer


def replace_subnetwork(
    net: Network,
    target: SubNetwork,
    alt: Alternative,
    source: Network,
    tag: str,
) -> Network:
    """Return ``net`` with ``target`` spliced out and the alternative's
    layers (from its ``source`` network) spliced in under ids
    ``<tag>/<orig-id>``."""
    input_layer, output_layer = _boundary_of(net, target)
    effective = effective_subnet(alt)
    if effective.spatial_change != target.spatial_change:
        raise BoundaryMismatch("spatial change differs")
    if (
        effective.in_channels != target.in_channels
        or effective.out_channels != target.out_channels
    ):
        raise BoundaryMismatch(
            f"boundary channels {effective.in_channels}/{effective.out_channels} "
            f"vs target {target.in_channels}/{target.out_channels}"
        )
    missing = alt.subnet.layer_ids - set(source.layers)
    if missing:
        raise BoundaryMismatch(f"alternative layers absent from source: {sorted(missing)}")

    def fresh(lid: str) -> str:
        return f"{tag}/{lid}"

    alt_in = alt.subnet.input_layer
    alt_out = alt.subnet.output_layer
    in_ratio = Fraction(effective.in_channels, source.layers[alt_in].in_channels)
    out_ratio = Fraction(effective.out_channels, source.layers[alt_out].out_channels)
    scale = in_ratio * out_ratio

    new_layers: list[Layer] = []
    for lid, layer in net.layers.items():
        if lid not in target.layer_ids:
            new_layers.append(layer)
    for lid in sorted(alt.subnet.layer_ids):
        layer = source.layers[lid]
        fields = {"id": fresh(lid)}
        if lid == alt_in and layer.in_channels != effective.in_channels:
            fields["in_channels"] = effective.in_channels
        if lid == alt_out and layer.out_channels != effective.out_channels:
            fields["out_channels"] = effective.out_channels
        if scale != 1:
            fields["cost"] = dc_replace(
                layer.cost,
                flops=math.floor(layer.cost.flops * scale),
                params=math.floor(layer.cost.params * scale),
            )
        new_layers.append(dc_replace(layer, **fields))

    new_edges = [
        (s, d)
        for s, d in net.edges
        if s not in target.layer_ids and d not in target.layer_ids
    ]
    # internal wiring of the alternative
    for s, d in source.edges:
        if s in alt.subnet.layer_ids and d in alt.subnet.layer_ids:
            new_edges.append((fresh(s), fresh(d)))
    # inbound boundary edge(s)
    for p in net.predecessors(input_layer):
        if p not in target.layer_ids:
            new_edges.append((p, fresh(alt_in)))
    # outbound boundary edges, fan-out preserved
    for s in net.successors(output_layer):
        if s not in target.layer_ids:
            new_edges.append((fresh(alt_out), s))

    graph_inputs = [
        fresh(alt_in) if lid == input_layer else lid
        for lid in net.graph_inputs
        if lid not in target.layer_ids or lid == input_layer
    ]
    graph_outputs = [
        fresh(alt_out) if lid == output_layer else lid
        for lid in net.graph_outputs
        if lid not in target.layer_ids or lid == output_layer
    ]
    return Network(net.name, new_layers, new_edges, graph_inputs, graph_outputs)


def apply_plan(
    house: ModelHouse,
    plan: frozenset[str] | set[str] | list[str],
    profile=None,
) -> tuple[Network, dict[str, str]]:
    """Induce the student network for a feasible plan.

    Replacements run in deterministic order (targets sorted by topological
    position of their input layer). Returns the student plus a provenance
    map from student layer id to the alternative that produced it.
    """
    order = topological_order(house.teacher) or []
    position = {lid: i for i, lid in enumerate(order)}
    ordered = sorted(
        plan,
        key=lambda a: (position.get(house.target_of(a).input_layer, 0), a),
    )
    student = house.teacher
    provenance: dict[str, str] = {}
    for k, alt_id in enumerate(ordered):
        alt = house.alternatives[alt_id]
        target = house.target_of(alt_id)
        source = house.sources[alt.subnet.source]
        tag = f"alt{k}"
        student = replace_subnetwork(student, target, alt, source, tag)
        for lid in alt.subnet.layer_ids:
            provenance[f"{tag}/{lid}"] = alt_id
    return student, provenance


_PALETTE = [
    "lightblue",
    "lightsalmon",
    "palegreen",
    "plum",
    "khaki",
    "lightpink",
    "aquamarine",
    "wheat",
]


def render_dot(net: Network, provenance: Optional[dict[str, str]] = None) -> str:
    """Graphviz text for a network; replaced regions are colored per origin
    alternative and carry it as a node attribute."""
    provenance = provenance or {}
    origins = sorted(set(provenance.values()))
    color_of = {o: _PALETTE[i % len(_PALETTE)] for i, o in enumerate(origins)}
    lines = [f'digraph "{net.name}" {{', "  rankdir=TB;"]
    for lid in sorted(net.layers):
        layer = net.layers[lid]
        label = f"{lid}\\n{layer.kind} {layer.in_channels}>{layer.out_channels}"
        attrs = [f'label="{label}"', "shape=box"]
        if lid in provenance:
            origin = provenance[lid]
            attrs.append(f'style=filled,fillcolor={color_of[origin]}')
            attrs.append(f'origin="{origin}"')
        lines.append(f'  "{lid}" [{",".join(attrs)}];')
    for s, d in sorted(net.edges):
        lines.append(f'  "{s}" -> "{d}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def check_student(net: Network) -> list[str]:
    return validate_network(net)
