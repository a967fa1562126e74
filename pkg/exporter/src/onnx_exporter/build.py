"""Small authoring helpers for constructing ONNX models in code.

Used by the fixture generator and the test suite; weights are filled with
a deterministic ramp so files stay small and reproducible.
"""

from __future__ import annotations

from .onnx_pb import (
    ATTR_INT,
    ATTR_INTS,
    ATTR_TENSOR,
    FLOAT,
    INT64,
    Attribute,
    Graph,
    Model,
    Node,
    Tensor,
    ValueInfo,
)


def ramp(count: int) -> list[float]:
    return [((i * 37) % 19 - 9) / 16 for i in range(count)]


def weight(name: str, dims: list[int]) -> Tensor:
    count = 1
    for d in dims:
        count *= d
    return Tensor(name=name, data_type=FLOAT, dims=dims, float_data=ramp(count))


def shape_tensor(name: str, dims: list[int]) -> Tensor:
    return Tensor(name=name, data_type=INT64, dims=[len(dims)], int64_data=dims)


def attr_i(name: str, value: int) -> Attribute:
    return Attribute(name=name, type=ATTR_INT, i=value)


def attr_ints(name: str, values: list[int]) -> Attribute:
    return Attribute(name=name, type=ATTR_INTS, ints=list(values))


def attr_tensor(name: str, tensor: Tensor) -> Attribute:
    return Attribute(name=name, type=ATTR_TENSOR, t=tensor)


def node(op: str, name: str, inputs: list[str], outputs: list[str],
         attributes: list[Attribute] | None = None) -> Node:
    return Node(
        op_type=op, name=name, inputs=list(inputs), outputs=list(outputs),
        attributes=list(attributes or []),
    )


def conv(name, x, out, cin, cout, k=3, stride=1, pad=1, group=1,
         bias=True) -> tuple[Node, list[Tensor]]:
    tensors = [weight(f"{name}.w", [cout, cin // group, k, k])]
    inputs = [x, f"{name}.w"]
    if bias:
        tensors.append(weight(f"{name}.b", [cout]))
        inputs.append(f"{name}.b")
    attrs = [
        attr_ints("kernel_shape", [k, k]),
        attr_ints("strides", [stride, stride]),
        attr_ints("pads", [pad, pad, pad, pad]),
        attr_i("group", group),
    ]
    return node("Conv", name, inputs, [out], attrs), tensors


def gemm(name, x, out, k, n, bias=True) -> tuple[Node, list[Tensor]]:
    tensors = [weight(f"{name}.w", [n, k])]
    inputs = [x, f"{name}.w"]
    if bias:
        tensors.append(weight(f"{name}.b", [n]))
        inputs.append(f"{name}.b")
    return node("Gemm", name, inputs, [out], [attr_i("transB", 1)]), tensors


def batchnorm(name, x, out, c) -> tuple[Node, list[Tensor]]:
    names = [f"{name}.{suffix}" for suffix in ("scale", "bias", "mean", "var")]
    tensors = [weight(n, [c]) for n in names]
    return node("BatchNormalization", name, [x, *names], [out]), tensors


def value_info(name: str, shape: list[int]) -> ValueInfo:
    return ValueInfo(name=name, shape=list(shape))


def model(name: str, input_shape: list[int], output_name: str,
          output_shape: list[int], nodes: list[Node],
          initializers: list[Tensor]) -> Model:
    graph = Graph(
        name=name,
        nodes=nodes,
        initializers=initializers,
        inputs=[value_info("data", input_shape)],
        outputs=[value_info(output_name, output_shape)],
    )
    return Model(graph=graph)
