import pytest

from onnx_exporter import build as b
from onnx_exporter.errors import MalformedModel
from onnx_exporter.onnx_pb import (
    Model,
    Node,
    Tensor,
    ValueInfo,
    _read_varint,
    _write_varint,
)


def test_varint_roundtrip():
    for value in (0, 1, 127, 128, 300, 2**32, 2**63 - 1):
        buf = bytearray()
        _write_varint(buf, value)
        got, pos = _read_varint(bytes(buf), 0)
        assert (got, pos) == (value, len(buf))


def test_tensor_roundtrip():
    t = b.weight("w", [2, 3, 3, 3])
    back = Tensor.decode(t.encode())
    assert back.name == "w"
    assert back.dims == [2, 3, 3, 3]
    assert back.float_data == pytest.approx(t.float_data)
    assert back.element_count() == 54


def test_int64_tensor_roundtrip():
    t = b.shape_tensor("shape", [1, -1])
    back = Tensor.decode(t.encode())
    assert back.int64_data == [1, -1]


def test_node_roundtrip():
    n, _ = b.conv("c", "x", "y", cin=4, cout=8, stride=2)
    back = Node.decode(n.encode())
    assert back.op_type == "Conv"
    assert back.inputs == ["x", "c.w", "c.b"]
    assert back.attr("strides").ints == [2, 2]
    assert back.attr("group").i == 1
    assert back.attr("missing") is None


def test_value_info_roundtrip():
    vi = ValueInfo(name="data", shape=[1, 3, 32, None])
    back = ValueInfo.decode(vi.encode())
    assert back.name == "data"
    assert back.shape == [1, 3, 32, None]


def test_model_roundtrip():
    model = b.model(
        "m", [1, 4, 8, 8], "y", [1, 4, 8, 8],
        [b.node("Relu", "r", ["data"], ["y"])], [],
    )
    back = Model.decode(model.encode())
    assert back.graph.name == "m"
    assert back.graph.nodes[0].op_type == "Relu"
    assert back.opset_version == model.opset_version
    assert back.graph.inputs[0].shape == [1, 4, 8, 8]


def test_unknown_fields_skipped():
    # doc_string (field 10 on GraphProto) is not modeled; splice one in
    model = b.model(
        "m", [1, 4, 8, 8], "y", [1, 4, 8, 8],
        [b.node("Relu", "r", ["data"], ["y"])], [],
    )
    graph_bytes = bytearray(model.graph.encode())
    graph_bytes += bytes([0x52, 4]) + b"note"  # field 10, wire type 2
    from onnx_exporter.onnx_pb import Graph

    back = Graph.decode(bytes(graph_bytes))
    assert back.nodes[0].op_type == "Relu"


def test_truncated_rejected():
    data = b.model("m", [1, 1, 1, 1], "y", [1], [], []).encode()
    with pytest.raises(MalformedModel):
        Model.decode(data[:-3])


def test_graphless_rejected():
    with pytest.raises(MalformedModel):
        Model.decode(b"")
