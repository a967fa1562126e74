"""ONNX graph to IR JSON conversion.

One IR layer per compute node. Channels and spatial sizes come from a
static NCHW shape inference pass; FLOPs are counted as 2 multiply-adds
per MAC; parameters are the element counts of the node's weight tensors.
Plumbing nodes with no compute (Identity, Dropout, Constant) fold away.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import DynamicShape, MalformedModel, UnsupportedOperator
from .onnx_pb import FLOAT, Graph, Model, Node, Tensor

ACT_OPS = {
    "Relu", "Sigmoid", "Tanh", "LeakyRelu", "Clip", "Elu", "HardSwish",
    "HardSigmoid", "Softmax",
}


@dataclass
class Shape:
    c: int
    h: int
    w: int

    def elements(self) -> int:
        return self.c * self.h * self.w


@dataclass
class IRLayer:
    id: str
    kind: str
    in_channels: int
    out_channels: int
    spatial_change: Fraction
    flops: int
    params: int


def _attr_ints(node: Node, name: str, default: list[int]) -> list[int]:
    a = node.attr(name)
    return list(a.ints) if a is not None and a.ints else list(default)


def _attr_int(node: Node, name: str, default: int) -> int:
    a = node.attr(name)
    return a.i if a is not None else default


def _conv_out(size: int, kernel: int, stride: int, pad_a: int, pad_b: int,
              dilation: int) -> int:
    eff = dilation * (kernel - 1) + 1
    return (size + pad_a + pad_b - eff) // stride + 1


def _node_label(node: Node, index: int) -> str:
    base = node.name or f"{node.op_type.lower()}_{index:02d}"
    return re.sub(r"[^A-Za-z0-9_./-]", "_", base)


def _input_shape(graph: Graph) -> tuple[str, Shape]:
    init_names = {t.name for t in graph.initializers}
    data_inputs = [vi for vi in graph.inputs if vi.name not in init_names]
    if len(data_inputs) != 1:
        raise MalformedModel(
            f"expected a single data input, found {len(data_inputs)}"
        )
    vi = data_inputs[0]
    if len(vi.shape) != 4 or any(d is None or d <= 0 for d in vi.shape):
        raise DynamicShape(f"input {vi.name!r} is not static NCHW: {vi.shape}")
    _, c, h, w = vi.shape
    return vi.name, Shape(c, h, w)


def convert(model: Model) -> list[tuple[IRLayer, list[str]]]:
    """Returns (layer, input layer ids) pairs in node order, with graph
    inputs/outputs recoverable via ``graph_io``."""
    graph = model.graph
    inits = {t.name: t for t in graph.initializers}
    input_name, input_shape = _input_shape(graph)
    shapes: dict[str, Shape] = {input_name: input_shape}
    alias: dict[str, str] = {}
    producer: dict[str, str] = {}
    out: list[tuple[IRLayer, list[str]]] = []

    def resolve(name: str) -> str:
        while name in alias:
            name = alias[name]
        return name

    for index, node in enumerate(graph.nodes):
        if node.op_type == "Constant":
            a = node.attr("value")
            if a is None or a.t is None:
                raise MalformedModel(f"Constant node {node.name!r} without value")
            a.t.name = node.outputs[0]
            inits[node.outputs[0]] = a.t
            continue
        if node.op_type in ("Identity", "Dropout"):
            alias[node.outputs[0]] = node.inputs[0]
            continue

        label = _node_label(node, index)
        data_in = [resolve(n) for n in node.inputs if resolve(n) not in inits]
        weights = [inits[resolve(n)] for n in node.inputs if resolve(n) in inits]
        for name in data_in:
            if name not in shapes:
                raise MalformedModel(
                    f"node {label!r} consumes unknown tensor {name!r}"
                )
        layer, out_shape = _convert_node(
            node, label, [shapes[n] for n in data_in], weights
        )
        shapes[node.outputs[0]] = out_shape
        feeders = [producer[n] for n in data_in if n in producer]
        producer[node.outputs[0]] = label
        out.append((layer, feeders))

    for vi in graph.outputs:
        if resolve(vi.name) not in producer:
            raise MalformedModel(f"graph output {vi.name!r} never produced")
    return out


def graph_io(model: Model) -> tuple[list[str], list[str]]:
    """Layer ids consuming the model input / producing the model outputs."""
    graph = model.graph
    inits = {t.name for t in graph.initializers}
    for node in graph.nodes:
        if node.op_type == "Constant":
            inits.add(node.outputs[0])
    alias: dict[str, str] = {}
    for node in graph.nodes:
        if node.op_type in ("Identity", "Dropout"):
            alias[node.outputs[0]] = node.inputs[0]

    def resolve(name: str) -> str:
        while name in alias:
            name = alias[name]
        return name

    input_name, _ = _input_shape(graph)
    entry: list[str] = []
    producer: dict[str, str] = {}
    for index, node in enumerate(graph.nodes):
        if node.op_type in ("Constant", "Identity", "Dropout"):
            continue
        label = _node_label(node, index)
        data_in = [resolve(n) for n in node.inputs if resolve(n) not in inits]
        if input_name in data_in:
            entry.append(label)
        producer[node.outputs[0]] = label
    exits = [producer[resolve(vi.name)] for vi in graph.outputs]
    return entry, exits


def _convert_node(
    node: Node, label: str, in_shapes: list[Shape], weights: list[Tensor]
) -> tuple[IRLayer, Shape]:
    op = node.op_type
    if op == "Conv":
        return _conv(node, label, in_shapes, weights)
    if op in ("Gemm", "MatMul"):
        return _gemm(node, label, in_shapes, weights)
    if op in ACT_OPS:
        s = in_shapes[0]
        return _simple(label, "act", s, s, flops=s.elements()), s
    if op == "BatchNormalization":
        s = in_shapes[0]
        params = sum(t.element_count() for t in weights)
        return _simple(label, "bn", s, s, flops=2 * s.elements(), params=params), s
    if op in ("MaxPool", "AveragePool"):
        return _pool(node, label, in_shapes[0])
    if op == "GlobalAveragePool":
        s = in_shapes[0]
        out = Shape(s.c, 1, 1)
        return _simple(label, "pool", s, out, flops=s.elements()), out
    if op in ("Add", "Mul"):
        s = in_shapes[0]
        for other in in_shapes[1:]:
            if (other.c, other.h, other.w) != (s.c, s.h, s.w):
                raise UnsupportedOperator(f"{op} with mismatched shapes", label)
        return _simple(label, op.lower(), s, s, flops=s.elements()), s
    if op == "Concat":
        if _attr_int(node, "axis", 1) != 1:
            raise UnsupportedOperator(f"{op} on non-channel axis", label)
        s = in_shapes[0]
        out = Shape(sum(x.c for x in in_shapes), s.h, s.w)
        # the IR convention declares the inbound channel *sum* on a concat
        return _simple(label, "concat", Shape(out.c, s.h, s.w), out), out
    if op == "Flatten":
        s = in_shapes[0]
        out = Shape(s.elements(), 1, 1)
        return _simple(label, "other", s, out), out
    if op == "Reshape":
        return _reshape(label, in_shapes[0], weights)
    raise UnsupportedOperator(op, label)


def _simple(
    label: str, kind: str, s_in: Shape, s_out: Shape, flops: int = 0,
    params: int = 0,
) -> IRLayer:
    if Fraction(s_out.h, s_in.h) != Fraction(s_out.w, s_in.w):
        raise DynamicShape(f"anisotropic spatial change at {label!r}")
    return IRLayer(
        id=label,
        kind=kind,
        in_channels=s_in.c,
        out_channels=s_out.c,
        spatial_change=Fraction(s_out.h, s_in.h),
        flops=flops,
        params=params,
    )


def _conv(node, label, in_shapes, weights):
    if not weights:
        raise UnsupportedOperator("Conv without weight initializer", label)
    weight = weights[0]
    if len(weight.dims) != 4:
        raise UnsupportedOperator("Conv with non-2D weight", label)
    cout, cin_per_group, kh, kw = weight.dims
    s = in_shapes[0]
    group = _attr_int(node, "group", 1)
    strides = _attr_ints(node, "strides", [1, 1])
    pads = _attr_ints(node, "pads", [0, 0, 0, 0])
    dilations = _attr_ints(node, "dilations", [1, 1])
    if s.c != cin_per_group * group:
        raise MalformedModel(
            f"Conv {label!r}: input has {s.c} channels, weight expects "
            f"{cin_per_group * group}"
        )
    out = Shape(
        cout,
        _conv_out(s.h, kh, strides[0], pads[0], pads[2], dilations[0]),
        _conv_out(s.w, kw, strides[1], pads[1], pads[3], dilations[1]),
    )
    if out.h <= 0 or out.w <= 0:
        raise DynamicShape(f"Conv {label!r} collapses spatial size")
    kind = "dwconv" if group == s.c and cin_per_group == 1 else "conv"
    flops = 2 * kh * kw * cin_per_group * cout * out.h * out.w
    params = sum(t.element_count() for t in weights)
    layer = _simple(label, kind, s, out, flops=flops, params=params)
    return layer, out


def _gemm(node, label, in_shapes, weights):
    if not weights:
        raise UnsupportedOperator(f"{node.op_type} without weight", label)
    weight = weights[0]
    if len(weight.dims) != 2:
        raise UnsupportedOperator(f"{node.op_type} with non-2D weight", label)
    if node.op_type == "Gemm" and _attr_int(node, "transB", 0):
        n_out, k = weight.dims
    else:
        k, n_out = weight.dims
    s = in_shapes[0]
    if s.elements() != k:
        raise MalformedModel(
            f"{node.op_type} {label!r}: {s.elements()} input features, "
            f"weight expects {k}"
        )
    out = Shape(n_out, 1, 1)
    # a Gemm fed directly by a spatial tensor absorbs the flatten
    layer = IRLayer(
        id=label,
        kind="dense",
        in_channels=s.c if (s.h, s.w) == (1, 1) else k,
        out_channels=n_out,
        spatial_change=Fraction(1) if (s.h, s.w) == (1, 1) else Fraction(1, s.h),
        flops=2 * k * n_out,
        params=sum(t.element_count() for t in weights),
    )
    return layer, out


def _pool(node, label, s):
    a = node.attr("kernel_shape")
    if a is None or len(a.ints) != 2:
        raise UnsupportedOperator("Pool without 2D kernel_shape", label)
    kh, kw = a.ints
    strides = _attr_ints(node, "strides", [kh, kw])
    pads = _attr_ints(node, "pads", [0, 0, 0, 0])
    out = Shape(
        s.c,
        _conv_out(s.h, kh, strides[0], pads[0], pads[2], 1),
        _conv_out(s.w, kw, strides[1], pads[1], pads[3], 1),
    )
    if out.h <= 0 or out.w <= 0:
        raise DynamicShape(f"Pool {label!r} collapses spatial size")
    flops = kh * kw * out.elements()
    return _simple(label, "pool", s, out, flops=flops), out


def _reshape(label, s, weights):
    shape_tensors = [t for t in weights if t.int64_data]
    if not shape_tensors:
        raise DynamicShape(f"Reshape {label!r} without constant shape")
    dims = list(shape_tensors[0].int64_data)
    total = s.elements()
    known = 1
    for d in dims[1:]:
        if d > 0:
            known *= d
    dims = [total // known if d == -1 else d for d in dims]
    if len(dims) == 2:
        out = Shape(dims[1], 1, 1)
    elif len(dims) == 4:
        out = Shape(dims[1], dims[2], dims[3])
    else:
        raise UnsupportedOperator(f"Reshape to rank {len(dims)}", label)
    if out.elements() != total:
        raise MalformedModel(f"Reshape {label!r} changes element count")
    return _simple(label, "other", s, out), out


def to_ir_obj(model: Model, name: str, device_label: str | None = None) -> dict:
    """Assemble the IR JSON object: canonical field layout of the primary
    toolkit's graph schema."""
    converted = convert(model)
    entry, exits = graph_io(model)
    by_id = {}
    edges = []
    for layer, feeders in converted:
        if layer.id in by_id:
            raise MalformedModel(f"duplicate layer id {layer.id!r}")
        by_id[layer.id] = layer
        for src in feeders:
            edges.append([src, layer.id])
    latency = {device_label: "0/1"} if device_label else {}
    return {
        "name": name,
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
                "cost": {
                    "flops": layer.flops,
                    "params": layer.params,
                    "latency_us": dict(latency),
                },
            }
            for layer in sorted(by_id.values(), key=lambda l: l.id)
        ],
        "edges": sorted(edges),
        "inputs": sorted(set(entry)),
        "outputs": sorted(set(exits)),
    }
