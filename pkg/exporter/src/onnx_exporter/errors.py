class ExportError(Exception):
    """Base class for exporter failures."""


class MalformedModel(ExportError):
    """The file is not a parseable ONNX model."""


class UnsupportedOperator(ExportError):
    def __init__(self, op_type: str, node_name: str):
        super().__init__(f"unsupported operator {op_type!r} at node {node_name!r}")
        self.op_type = op_type
        self.node_name = node_name


class DynamicShape(ExportError):
    """A tensor shape is symbolic or unknown; only static shapes export."""
