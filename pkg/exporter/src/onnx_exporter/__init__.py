"""Export static-shape ONNX classifiers to the graph IR JSON consumed by
the blockswap toolkit."""

from .convert import IRLayer, Shape, convert, graph_io, to_ir_obj
from .count import flop_total, param_total
from .errors import (
    DynamicShape,
    ExportError,
    MalformedModel,
    UnsupportedOperator,
)
from .onnx_pb import (
    Attribute,
    Graph,
    Model,
    Node,
    Tensor,
    ValueInfo,
    load_model,
    save_model,
)

__version__ = "0.1.0"
