"""Neutral computation-graph representation, validation, and canonical JSON.

Networks are structural descriptions only: layers carry channel counts, an
exact rational spatial-change factor, and a cost summary. No tensor values,
no weights, no executable semantics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import jsonschema

from .errors import (
    InconsistentSpatial,
    MalformedDocument,
    NotSISO,
    SchemaViolation,
)

LAYER_KINDS = frozenset(
    {
        "conv",
        "dwconv",
        "dense",
        "pool",
        "act",
        "bn",
        "add",
        "mul",
        "concat",
        "input",
        "output",
        "other",
    }
)

MERGE_KINDS = frozenset({"add", "mul"})


def frac_to_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def frac_from_str(text: str) -> Fraction:
    num, _, den = text.partition("/")
    if not den:
        return Fraction(int(num))
    return Fraction(int(num), int(den))


@dataclass(frozen=True)
class CostVector:
    """FLOPs, parameter count, and optional per-device latency (rational)."""

    flops: int = 0
    params: int = 0
    latency_us: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.flops < 0 or self.params < 0:
            raise ValueError("cost components must be non-negative")
        for dev, val in self.latency_us.items():
            if not dev:
                raise ValueError("latency device names must be non-empty")
            if val < 0:
                raise ValueError("latency values must be non-negative")

    def __add__(self, other: "CostVector") -> "CostVector":
        devices = set(self.latency_us) | set(other.latency_us)
        # missing device entries contribute zero
        lat = {
            d: self.latency_us.get(d, Fraction(0)) + other.latency_us.get(d, Fraction(0))
            for d in devices
        }
        return CostVector(self.flops + other.flops, self.params + other.params, lat)


ZERO_COST = CostVector()


@dataclass(frozen=True)
class Layer:
    id: str
    kind: str
    in_channels: int
    out_channels: int
    spatial_change: Fraction = Fraction(1)
    cost: CostVector = ZERO_COST

    def __post_init__(self):
        if not self.id:
            raise ValueError("layer id must be non-empty")
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.in_channels < 1 or self.out_channels < 1:
            raise ValueError(f"layer {self.id}: channel counts must be >= 1")
        if self.spatial_change.numerator < 1 or self.spatial_change.denominator < 1:
            raise ValueError(f"layer {self.id}: spatial change must be positive")


class Network:
    """Immutable DAG of layers. Construction is tolerant: structural rules
    are checked by :func:`validate_network`, which reports violations as data.
    """

    def __init__(
        self,
        name: str,
        layers: Iterable[Layer],
        edges: Iterable[tuple[str, str]],
        graph_inputs: Iterable[str],
        graph_outputs: Iterable[str],
    ):
        self.name = name
        self.layers: dict[str, Layer] = {}
        for layer in layers:
            if layer.id in self.layers:
                raise ValueError(f"duplicate layer id {layer.id!r}")
            self.layers[layer.id] = layer
        self.edges = frozenset((str(s), str(d)) for s, d in edges)
        self.graph_inputs = tuple(graph_inputs)
        self.graph_outputs = tuple(graph_outputs)
        self._succ: dict[str, list[str]] = {lid: [] for lid in self.layers}
        self._pred: dict[str, list[str]] = {lid: [] for lid in self.layers}
        for src, dst in sorted(self.edges):
            if src in self._succ:
                self._succ[src].append(dst)
            if dst in self._pred:
                self._pred[dst].append(src)

    def successors(self, lid: str) -> list[str]:
        return self._succ.get(lid, [])

    def predecessors(self, lid: str) -> list[str]:
        return self._pred.get(lid, [])

    def inbound_count(self, lid: str) -> int:
        """Inbound connections, counting graph-input status as one external
        connection (and likewise for source-less layers)."""
        preds = len(self.predecessors(lid))
        if lid in self.graph_inputs or preds == 0:
            return preds + 1
        return preds

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.name == other.name
            and self.layers == other.layers
            and self.edges == other.edges
            and self.graph_inputs == other.graph_inputs
            and self.graph_outputs == other.graph_outputs
        )

    def __hash__(self):
        return hash((self.name, frozenset(self.layers), self.edges))

    def __repr__(self):
        return f"Network({self.name!r}, {len(self.layers)} layers, {len(self.edges)} edges)"


@dataclass(frozen=True, eq=False)
class SubNetwork:
    """A SISO region of a source network, identified by its member ids.

    Equality and hashing use (source, layer_ids): all other fields are
    derived from the members.
    """

    source: str
    layer_ids: frozenset[str]
    input_layer: str
    output_layer: str
    in_channels: int
    out_channels: int
    spatial_change: Fraction
    cost: CostVector

    def __eq__(self, other):
        if not isinstance(other, SubNetwork):
            return NotImplemented
        return self.source == other.source and self.layer_ids == other.layer_ids

    def __hash__(self):
        return hash((self.source, self.layer_ids))

    def __repr__(self):
        ids = ",".join(sorted(self.layer_ids))
        return f"SubNetwork({self.source}:[{ids}])"


def topological_order(net: Network) -> list[str] | None:
    """Kahn's algorithm with lexicographic tie-break; None if cyclic."""
    import heapq

    indeg = {lid: len(net.predecessors(lid)) for lid in net.layers}
    heap = [lid for lid, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        lid = heapq.heappop(heap)
        order.append(lid)
        for nxt in net.successors(lid):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(heap, nxt)
    if len(order) != len(net.layers):
        return None
    return order


def validate_network(net: Network) -> list[str]:
    """Return a list of violation messages; empty iff the network is valid."""
    report: list[str] = []
    for src, dst in sorted(net.edges):
        if src not in net.layers:
            report.append(f"edge ({src},{dst}): unknown source layer")
        if dst not in net.layers:
            report.append(f"edge ({src},{dst}): unknown destination layer")
    for lid in net.graph_inputs:
        if lid not in net.layers:
            report.append(f"graph input {lid}: unknown layer")
    for lid in net.graph_outputs:
        if lid not in net.layers:
            report.append(f"graph output {lid}: unknown layer")
    if report:
        return report

    if topological_order(net) is None:
        report.append("cycle: the layer graph is not acyclic")
        return report

    # reachability
    reachable = set(net.graph_inputs)
    stack = list(net.graph_inputs)
    while stack:
        for nxt in net.successors(stack.pop()):
            if nxt not in reachable:
                reachable.add(nxt)
                stack.append(nxt)
    coreachable = set(net.graph_outputs)
    stack = list(net.graph_outputs)
    while stack:
        for prv in net.predecessors(stack.pop()):
            if prv not in coreachable:
                coreachable.add(prv)
                stack.append(prv)
    for lid in sorted(net.layers):
        if lid not in reachable:
            report.append(f"layer {lid}: not reachable from any graph input")
        if lid not in coreachable:
            report.append(f"layer {lid}: does not reach any graph output")

    # merge-layer channel consistency
    for lid in sorted(net.layers):
        layer = net.layers[lid]
        preds = net.predecessors(lid)
        in_widths = [net.layers[p].out_channels for p in preds]
        if layer.kind in MERGE_KINDS and in_widths:
            if len(set(in_widths)) != 1 or layer.in_channels != in_widths[0]:
                report.append(
                    f"layer {lid}: merge channel mismatch (inbound {in_widths}, "
                    f"declared {layer.in_channels})"
                )
        if layer.kind == "concat" and in_widths:
            if layer.in_channels != sum(in_widths):
                report.append(
                    f"layer {lid}: concat channel mismatch (inbound sum "
                    f"{sum(in_widths)}, declared {layer.in_channels})"
                )
    return report


def siso_boundary(net: Network, layer_ids: frozenset[str]) -> tuple[str, str]:
    """Derive the (input_layer, output_layer) boundary of a SISO region.

    Input side counts connections: exactly one boundary-in connection must
    exist, entering the input layer, and the input layer must have at most
    one inbound edge in the source network. A graph-input member counts as
    having one external inbound connection. Output side counts source
    layers: every boundary-out edge (and graph-output membership) must
    originate at one layer.
    """
    in_connections = 0
    in_targets = set()
    out_sources = set()
    for lid in layer_ids:
        for p in net.predecessors(lid):
            if p not in layer_ids:
                in_connections += 1
                in_targets.add(lid)
        if lid in net.graph_inputs or not net.predecessors(lid):
            in_connections += 1
            in_targets.add(lid)
        for s in net.successors(lid):
            if s not in layer_ids:
                out_sources.add(lid)
        if lid in net.graph_outputs or not net.successors(lid):
            out_sources.add(lid)
    if in_connections != 1 or len(in_targets) != 1:
        raise NotSISO(f"{in_connections} boundary input connections")
    if len(out_sources) != 1:
        raise NotSISO(f"{len(out_sources)} boundary output source layers")
    input_layer = next(iter(in_targets))
    if net.inbound_count(input_layer) > 1:
        raise NotSISO(f"input layer {input_layer} has multiple inbound connections")
    return input_layer, next(iter(out_sources))


def subnetwork_from_layers(net: Network, layer_ids: Iterable[str]) -> SubNetwork:
    """Build the SISO sub-network over ``layer_ids``, deriving its boundary,
    channels, spatial change, and summed cost."""
    ids = frozenset(layer_ids)
    if not ids:
        raise ValueError("layer_ids must be non-empty")
    missing = ids - set(net.layers)
    if missing:
        raise ValueError(f"unknown layer ids: {sorted(missing)}")
    input_layer, output_layer = siso_boundary(net, ids)

    # spatial-change product along every input->output path, checked for
    # agreement at every join inside the region
    spatial: dict[str, Fraction] = {}
    order = topological_order(net)
    if order is None:
        raise NotSISO("source graph is cyclic")
    for lid in order:
        if lid not in ids:
            continue
        layer = net.layers[lid]
        preds = [p for p in net.predecessors(lid) if p in ids]
        if lid == input_layer:
            spatial[lid] = layer.spatial_change
            continue
        incoming = {spatial[p] for p in preds if p in spatial}
        if len(incoming) != 1:
            raise InconsistentSpatial(
                f"layer {lid}: inbound paths disagree on spatial product"
            )
        spatial[lid] = next(iter(incoming)) * layer.spatial_change

    cost = ZERO_COST
    for lid in sorted(ids):
        cost = cost + net.layers[lid].cost

    return SubNetwork(
        source=net.name,
        layer_ids=ids,
        input_layer=input_layer,
        output_layer=output_layer,
        in_channels=net.layers[input_layer].in_channels,
        out_channels=net.layers[output_layer].out_channels,
        spatial_change=spatial[output_layer],
        cost=cost,
    )


# ---------------------------------------------------------------------------
# canonical JSON serialization

IR_SCHEMA = {
    "type": "object",
    "required": ["name", "layers", "edges", "inputs", "outputs"],
    "properties": {
        "name": {"type": "string"},
        "layers": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind", "in_channels", "out_channels"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"enum": sorted(LAYER_KINDS)},
                    "in_channels": {"type": "integer", "minimum": 1},
                    "out_channels": {"type": "integer", "minimum": 1},
                    "spatial_change": {
                        "type": "object",
                        "required": ["num", "den"],
                        "properties": {
                            "num": {"type": "integer", "minimum": 1},
                            "den": {"type": "integer", "minimum": 1},
                        },
                    },
                    "cost": {
                        "type": "object",
                        "properties": {
                            "flops": {"type": "integer", "minimum": 0},
                            "params": {"type": "integer", "minimum": 0},
                            "latency_us": {
                                "type": "object",
                                "additionalProperties": {"type": "string"},
                            },
                        },
                    },
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "string"},
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "inputs": {"type": "array", "items": {"type": "string"}},
        "outputs": {"type": "array", "items": {"type": "string"}},
    },
}


def cost_to_obj(cost: CostVector) -> dict:
    return {
        "flops": cost.flops,
        "params": cost.params,
        "latency_us": {d: frac_to_str(v) for d, v in sorted(cost.latency_us.items())},
    }


def cost_from_obj(obj: dict) -> CostVector:
    return CostVector(
        flops=obj.get("flops", 0),
        params=obj.get("params", 0),
        latency_us={d: frac_from_str(v) for d, v in obj.get("latency_us", {}).items()},
    )


def network_to_obj(net: Network) -> dict:
    return {
        "name": net.name,
        "layers": [
            {
                "id": layer.id,
                "kind": layer.kind,
                "in_channels": layer.in_channels,
                "out_channels": layer.out_channels,
                "spatial_change": {
                    "num": layer.spatial_change.numerator,
                    "den": layer.spatial_change.denominator,
                },
                "cost": cost_to_obj(layer.cost),
            }
            for _, layer in sorted(net.layers.items())
        ],
        "edges": [list(e) for e in sorted(net.edges)],
        "inputs": list(net.graph_inputs),
        "outputs": list(net.graph_outputs),
    }


def canonical_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def serialize_network(net: Network) -> bytes:
    """Canonical bytes: sorted keys, sorted layer ids and edges, so equal
    networks serialize identically."""
    return canonical_bytes(network_to_obj(net))


def network_from_obj(obj: dict) -> Network:
    try:
        jsonschema.validate(obj, IR_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(exc.json_path, exc.message) from exc
    layers = [
        Layer(
            id=entry["id"],
            kind=entry["kind"],
            in_channels=entry["in_channels"],
            out_channels=entry["out_channels"],
            spatial_change=Fraction(
                entry.get("spatial_change", {"num": 1, "den": 1})["num"],
                entry.get("spatial_change", {"num": 1, "den": 1})["den"],
            ),
            cost=cost_from_obj(entry.get("cost", {})),
        )
        for entry in obj["layers"]
    ]
    return Network(
        name=obj["name"],
        layers=layers,
        edges=[(s, d) for s, d in obj["edges"]],
        graph_inputs=obj["inputs"],
        graph_outputs=obj["outputs"],
    )


def parse_network(data: bytes) -> Network:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedDocument(str(exc)) from exc
    if not isinstance(obj, dict):
        raise SchemaViolation("$", "document root must be an object")
    return network_from_obj(obj)


def subnetwork_to_obj(sn: SubNetwork) -> dict:
    return {
        "source": sn.source,
        "member_ids": sorted(sn.layer_ids),
        "input_layer": sn.input_layer,
        "output_layer": sn.output_layer,
        "in_channels": sn.in_channels,
        "out_channels": sn.out_channels,
        "spatial_change": {
            "num": sn.spatial_change.numerator,
            "den": sn.spatial_change.denominator,
        },
        "cost": cost_to_obj(sn.cost),
    }


def subnetwork_from_obj(obj: dict) -> SubNetwork:
    return SubNetwork(
        source=obj["source"],
        layer_ids=frozenset(obj["member_ids"]),
        input_layer=obj["input_layer"],
        output_layer=obj["output_layer"],
        in_channels=obj["in_channels"],
        out_channels=obj["out_channels"],
        spatial_change=Fraction(obj["spatial_change"]["num"], obj["spatial_change"]["den"]),
        cost=cost_from_obj(obj["cost"]),
    )
