"""Independent whole-model FLOPs/parameter counters.

Deliberately separate from the per-layer conversion in ``convert``: the
parameter total is just the element count of every float weight tensor,
and the FLOPs total runs its own minimal shape walk. The test suite
cross-checks per-layer sums against these, so a slip in either path shows
up as a disagreement.
"""

from __future__ import annotations

from .errors import MalformedModel
from .onnx_pb import FLOAT, Model


def param_total(model: Model) -> int:
    """Element count of all float initializers (shape tensors are int64
    and do not contribute)."""
    total = 0
    for tensor in model.graph.initializers:
        if tensor.data_type == FLOAT:
            total += tensor.element_count()
    for node in model.graph.nodes:
        if node.op_type == "Constant":
            a = node.attr("value")
            if a is not None and a.t is not None and a.t.data_type == FLOAT:
                total += a.t.element_count()
    return total


def flop_total(model: Model) -> int:
    """2-per-MAC FLOPs summed over the whole graph in one flat pass over
    tensor volumes, without building any layer objects."""
    graph = model.graph
    inits = {t.name: t for t in graph.initializers}
    for node in graph.nodes:
        if node.op_type == "Constant" and node.attr("value") is not None:
            inits[node.outputs[0]] = node.attr("value").t

    vol: dict[str, tuple[int, ...]] = {}
    for vi in graph.inputs:
        if vi.name not in inits:
            if any(d is None for d in vi.shape):
                raise MalformedModel("dynamic input shape")
            vol[vi.name] = tuple(vi.shape)

    def out_hw(h, w, kh, kw, st, pads, dil=(1, 1)):
        eh = dil[0] * (kh - 1) + 1
        ew = dil[1] * (kw - 1) + 1
        return (
            (h + pads[0] + pads[2] - eh) // st[0] + 1,
            (w + pads[1] + pads[3] - ew) // st[1] + 1,
        )

    def ints(node, name, default):
        a = node.attr(name)
        return list(a.ints) if a is not None and a.ints else default

    total = 0
    alias: dict[str, str] = {}
    for node in graph.nodes:
        if node.op_type == "Constant":
            continue
        if node.op_type in ("Identity", "Dropout"):
            alias[node.outputs[0]] = node.inputs[0]
            continue
        data = []
        for name in node.inputs:
            while name in alias:
                name = alias[name]
            if name not in inits:
                data.append(vol[name])
        op = node.op_type
        shape = data[0]
        if op == "Conv":
            wdims = inits[node.inputs[1]].dims
            cout, cin_g, kh, kw = wdims
            h, w = out_hw(
                shape[2], shape[3], kh, kw,
                ints(node, "strides", [1, 1]),
                ints(node, "pads", [0, 0, 0, 0]),
                ints(node, "dilations", [1, 1]),
            )
            total += 2 * kh * kw * cin_g * cout * h * w
            out = (shape[0], cout, h, w)
        elif op in ("Gemm", "MatMul"):
            wdims = inits[node.inputs[1]].dims
            a = node.attr("transB")
            if op == "Gemm" and a is not None and a.i:
                n_out, k = wdims
            else:
                k, n_out = wdims
            total += 2 * k * n_out
            out = (shape[0], n_out)
        elif op in ("MaxPool", "AveragePool"):
            kh, kw = ints(node, "kernel_shape", [1, 1])
            h, w = out_hw(
                shape[2], shape[3], kh, kw,
                ints(node, "strides", [kh, kw]),
                ints(node, "pads", [0, 0, 0, 0]),
            )
            total += kh * kw * shape[1] * h * w
            out = (shape[0], shape[1], h, w)
        elif op == "GlobalAveragePool":
            total += shape[1] * shape[2] * shape[3]
            out = (shape[0], shape[1], 1, 1)
        elif op == "BatchNormalization":
            total += 2 * shape[1] * shape[2] * shape[3]
            out = shape
        elif op in ("Add", "Mul") or op in (
            "Relu", "Sigmoid", "Tanh", "LeakyRelu", "Clip", "Elu",
            "HardSwish", "HardSigmoid", "Softmax",
        ):
            elems = 1
            for d in shape[1:]:
                elems *= d
            total += elems
            out = shape
        elif op == "Concat":
            out = (shape[0], sum(s[1] for s in data), shape[2], shape[3])
        elif op == "Flatten":
            elems = 1
            for d in shape[1:]:
                elems *= d
            out = (shape[0], elems)
        elif op == "Reshape":
            dims = list(inits[node.inputs[1]].int64_data)
            elems = 1
            for d in shape[1:]:
                elems *= d
            known = 1
            for d in dims[1:]:
                if d > 0:
                    known *= d
            dims = [elems // known if d == -1 else d for d in dims]
            out = tuple(dims)
        else:
            raise MalformedModel(f"counter cannot handle {op}")
        vol[node.outputs[0]] = out
    return total
