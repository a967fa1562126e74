"""Minimal ONNX protobuf reader/writer.

The ``onnx`` package (and a compatible protobuf codegen toolchain) is not
always available, so this module speaks the protobuf wire format directly
for the small subset of ``onnx.proto`` the exporter needs: models, graphs,
nodes, attributes, tensors, and static tensor-shape value infos. Field
numbers follow the upstream schema; unknown fields are skipped, so models
produced by mainstream tooling still parse as long as they stick to the
supported operators.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import MalformedModel

# TensorProto.DataType values we care about
FLOAT = 1
INT64 = 7

# AttributeProto.AttributeType values
ATTR_FLOAT = 1
ATTR_INT = 2
ATTR_STRING = 3
ATTR_TENSOR = 4
ATTR_INTS = 7


# ---------------------------------------------------------------- wire level

def _write_varint(out: bytearray, value: int):
    if value < 0:
        value &= (1 << 64) - 1
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _read_varint(data: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise MalformedModel("truncated varint")
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 70:
            raise MalformedModel("varint too long")


def _write_tag(out: bytearray, number: int, wire_type: int):
    _write_varint(out, (number << 3) | wire_type)


def _write_bytes(out: bytearray, number: int, payload: bytes):
    _write_tag(out, number, 2)
    _write_varint(out, len(payload))
    out += payload


def _write_str(out: bytearray, number: int, text: str):
    _write_bytes(out, number, text.encode("utf-8"))


def _write_int(out: bytearray, number: int, value: int):
    _write_tag(out, number, 0)
    _write_varint(out, value)


def _write_packed_ints(out: bytearray, number: int, values) -> None:
    if not values:
        return
    payload = bytearray()
    for v in values:
        _write_varint(payload, v)
    _write_bytes(out, number, bytes(payload))


def _signed64(value: int) -> int:
    return value - (1 << 64) if value >= (1 << 63) else value


def _fields(data: bytes):
    """Yield (field_number, wire_type, value) with length-delimited values
    as bytes and varints as signed ints; unknown wire types reject."""
    pos = 0
    while pos < len(data):
        key, pos = _read_varint(data, pos)
        number, wire_type = key >> 3, key & 7
        if wire_type == 0:
            value, pos = _read_varint(data, pos)
            yield number, wire_type, _signed64(value)
        elif wire_type == 2:
            size, pos = _read_varint(data, pos)
            if pos + size > len(data):
                raise MalformedModel("truncated field")
            yield number, wire_type, data[pos:pos + size]
            pos += size
        elif wire_type == 5:
            if pos + 4 > len(data):
                raise MalformedModel("truncated fixed32")
            yield number, wire_type, data[pos:pos + 4]
            pos += 4
        elif wire_type == 1:
            if pos + 8 > len(data):
                raise MalformedModel("truncated fixed64")
            yield number, wire_type, data[pos:pos + 8]
            pos += 8
        else:
            raise MalformedModel(f"unsupported wire type {wire_type}")


def _unpack_ints(value) -> list[int]:
    """A repeated int64 field arrives packed (bytes) or as single varints."""
    if isinstance(value, int):
        return [value]
    out = []
    pos = 0
    while pos < len(value):
        v, pos = _read_varint(value, pos)
        out.append(_signed64(v))
    return out


# ------------------------------------------------------------- object model

@dataclass
class Tensor:
    name: str = ""
    data_type: int = FLOAT
    dims: list[int] = field(default_factory=list)
    float_data: list[float] = field(default_factory=list)
    int64_data: list[int] = field(default_factory=list)

    def element_count(self) -> int:
        count = 1
        for d in self.dims:
            count *= d
        return count

    def encode(self) -> bytes:
        out = bytearray()
        _write_packed_ints(out, 1, self.dims)
        _write_int(out, 2, self.data_type)
        if self.float_data:
            payload = struct.pack(f"<{len(self.float_data)}f", *self.float_data)
            _write_bytes(out, 4, payload)
        if self.int64_data:
            _write_packed_ints(out, 7, self.int64_data)
        if self.name:
            _write_str(out, 8, self.name)
        return bytes(out)

    @classmethod
    def decode(cls, data: bytes) -> "Tensor":
        t = cls()
        for number, wire_type, value in _fields(data):
            if number == 1:
                t.dims.extend(_unpack_ints(value))
            elif number == 2:
                t.data_type = value
            elif number == 4:
                if wire_type == 5:
                    t.float_data.append(struct.unpack("<f", value)[0])
                else:
                    t.float_data.extend(
                        struct.unpack(f"<{len(value) // 4}f", value)
                    )
            elif number == 7:
                t.int64_data.extend(_unpack_ints(value))
            elif number == 8:
                t.name = value.decode("utf-8")
            elif number == 9:  # raw_data
                if t.data_type == FLOAT:
                    t.float_data.extend(
                        struct.unpack(f"<{len(value) // 4}f", value)
                    )
                elif t.data_type == INT64:
                    t.int64_data.extend(
                        struct.unpack(f"<{len(value) // 8}q", value)
                    )
        return t


@dataclass
class Attribute:
    name: str = ""
    type: int = 0
    f: float = 0.0
    i: int = 0
    s: bytes = b""
    t: Tensor | None = None
    ints: list[int] = field(default_factory=list)

    def encode(self) -> bytes:
        out = bytearray()
        _write_str(out, 1, self.name)
        if self.type == ATTR_FLOAT:
            _write_tag(out, 2, 5)
            out += struct.pack("<f", self.f)
        elif self.type == ATTR_INT:
            _write_int(out, 3, self.i)
        elif self.type == ATTR_STRING:
            _write_bytes(out, 4, self.s)
        elif self.type == ATTR_TENSOR and self.t is not None:
            _write_bytes(out, 5, self.t.encode())
        elif self.type == ATTR_INTS:
            for v in self.ints:
                _write_int(out, 8, v)
        _write_int(out, 20, self.type)
        return bytes(out)

    @classmethod
    def decode(cls, data: bytes) -> "Attribute":
        a = cls()
        for number, wire_type, value in _fields(data):
            if number == 1:
                a.name = value.decode("utf-8")
            elif number == 2:
                a.f = struct.unpack("<f", value)[0]
            elif number == 3:
                a.i = value
            elif number == 4:
                a.s = value
            elif number == 5:
                a.t = Tensor.decode(value)
            elif number == 8:
                a.ints.extend(_unpack_ints(value))
            elif number == 20:
                a.type = value
        return a


@dataclass
class Node:
    op_type: str = ""
    name: str = ""
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    attributes: list[Attribute] = field(default_factory=list)

    def attr(self, name: str) -> Attribute | None:
        for a in self.attributes:
            if a.name == name:
                return a
        return None

    def encode(self) -> bytes:
        out = bytearray()
        for s in self.inputs:
            _write_str(out, 1, s)
        for s in self.outputs:
            _write_str(out, 2, s)
        if self.name:
            _write_str(out, 3, self.name)
        _write_str(out, 4, self.op_type)
        for a in self.attributes:
            _write_bytes(out, 5, a.encode())
        return bytes(out)

    @classmethod
    def decode(cls, data: bytes) -> "Node":
        n = cls()
        for number, _, value in _fields(data):
            if number == 1:
                n.inputs.append(value.decode("utf-8"))
            elif number == 2:
                n.outputs.append(value.decode("utf-8"))
            elif number == 3:
                n.name = value.decode("utf-8")
            elif number == 4:
                n.op_type = value.decode("utf-8")
            elif number == 5:
                n.attributes.append(Attribute.decode(value))
        return n


@dataclass
class ValueInfo:
    """Tensor name plus a static shape; symbolic dims decode as None."""

    name: str = ""
    shape: list[int | None] = field(default_factory=list)
    elem_type: int = FLOAT

    def encode(self) -> bytes:
        shape = bytearray()
        for d in self.shape:
            dim = bytearray()
            if d is not None:
                _write_int(dim, 1, d)
            else:
                _write_str(dim, 2, "dyn")
            _write_bytes(shape, 1, bytes(dim))
        tensor_type = bytearray()
        _write_int(tensor_type, 1, self.elem_type)
        _write_bytes(tensor_type, 2, bytes(shape))
        type_proto = bytearray()
        _write_bytes(type_proto, 1, bytes(tensor_type))
        out = bytearray()
        _write_str(out, 1, self.name)
        _write_bytes(out, 2, bytes(type_proto))
        return bytes(out)

    @classmethod
    def decode(cls, data: bytes) -> "ValueInfo":
        vi = cls()
        for number, _, value in _fields(data):
            if number == 1:
                vi.name = value.decode("utf-8")
            elif number == 2:
                for tn, _, tv in _fields(value):
                    if tn != 1:  # TypeProto.tensor_type
                        continue
                    for fn, _, fv in _fields(tv):
                        if fn == 1:
                            vi.elem_type = fv
                        elif fn == 2:
                            for sn, _, sv in _fields(fv):
                                if sn != 1:  # TensorShapeProto.dim
                                    continue
                                dim_value = None
                                for dn, _, dv in _fields(sv):
                                    if dn == 1:
                                        dim_value = dv
                                vi.shape.append(dim_value)
        return vi


@dataclass
class Graph:
    name: str = ""
    nodes: list[Node] = field(default_factory=list)
    initializers: list[Tensor] = field(default_factory=list)
    inputs: list[ValueInfo] = field(default_factory=list)
    outputs: list[ValueInfo] = field(default_factory=list)

    def encode(self) -> bytes:
        out = bytearray()
        for n in self.nodes:
            _write_bytes(out, 1, n.encode())
        _write_str(out, 2, self.name)
        for t in self.initializers:
            _write_bytes(out, 5, t.encode())
        for vi in self.inputs:
            _write_bytes(out, 11, vi.encode())
        for vi in self.outputs:
            _write_bytes(out, 12, vi.encode())
        return bytes(out)

    @classmethod
    def decode(cls, data: bytes) -> "Graph":
        g = cls()
        for number, _, value in _fields(data):
            if number == 1:
                g.nodes.append(Node.decode(value))
            elif number == 2:
                g.name = value.decode("utf-8")
            elif number == 5:
                g.initializers.append(Tensor.decode(value))
            elif number == 11:
                g.inputs.append(ValueInfo.decode(value))
            elif number == 12:
                g.outputs.append(ValueInfo.decode(value))
        return g


@dataclass
class Model:
    graph: Graph = field(default_factory=Graph)
    ir_version: int = 8
    opset_version: int = 17
    producer_name: str = "onnx-ir-exporter"

    def encode(self) -> bytes:
        out = bytearray()
        _write_int(out, 1, self.ir_version)
        _write_str(out, 2, self.producer_name)
        _write_bytes(out, 7, self.graph.encode())
        opset = bytearray()
        _write_str(opset, 1, "")
        _write_int(opset, 2, self.opset_version)
        _write_bytes(out, 8, bytes(opset))
        return bytes(out)

    @classmethod
    def decode(cls, data: bytes) -> "Model":
        m = cls()
        seen_graph = False
        for number, _, value in _fields(data):
            if number == 1:
                m.ir_version = value
            elif number == 2:
                m.producer_name = value.decode("utf-8")
            elif number == 7:
                m.graph = Graph.decode(value)
                seen_graph = True
            elif number == 8:
                for on, _, ov in _fields(value):
                    if on == 2:
                        m.opset_version = ov
        if not seen_graph:
            raise MalformedModel("model has no graph")
        return m


def load_model(path: str) -> Model:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise MalformedModel(str(exc)) from exc
    try:
        return Model.decode(data)
    except MalformedModel:
        raise
    except Exception as exc:
        raise MalformedModel(f"not an ONNX model: {exc}") from exc


def save_model(model: Model, path: str):
    with open(path, "wb") as fh:
        fh.write(model.encode())
