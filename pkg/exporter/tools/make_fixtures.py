"""Author the committed ONNX fixtures and their expected IR JSON.

Run from the exporter directory:

    python3 tools/make_fixtures.py

Regenerates tests/fixtures/*.onnx and the matching *.ir.json files via
the exporter itself; the test suite then checks the committed IR against
a fresh export and against the primary toolkit's validator.
"""

import json
import os

from onnx_exporter import build as b
from onnx_exporter.convert import to_ir_obj
from onnx_exporter.onnx_pb import save_model

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")


def tiny_conv():
    """Two 3x3 convs with a relu between: the minimal interesting export."""
    nodes, inits = [], []
    n, t = b.conv("conv1", "data", "t1", cin=16, cout=32)
    nodes.append(n)
    inits.extend(t)
    nodes.append(b.node("Relu", "relu1", ["t1"], ["t2"]))
    n, t = b.conv("conv2", "t2", "t3", cin=32, cout=32, stride=2)
    nodes.append(n)
    inits.extend(t)
    return b.model("tiny_conv", [1, 16, 8, 8], "t3", [1, 32, 4, 4], nodes, inits)


def toy_resnet():
    """Conv stem, a two-branch residual block, global pool, classifier."""
    nodes, inits = [], []

    def add(pair):
        n, t = pair
        nodes.append(n)
        inits.extend(t)

    add(b.conv("stem", "data", "s1", cin=3, cout=8))
    add(b.batchnorm("stem_bn", "s1", "s2", 8))
    nodes.append(b.node("Relu", "stem_relu", ["s2"], ["s3"]))
    add(b.conv("block_a", "s3", "a1", cin=8, cout=8))
    nodes.append(b.node("Relu", "block_relu", ["a1"], ["a2"]))
    add(b.conv("block_b", "a2", "b1", cin=8, cout=8))
    nodes.append(b.node("Add", "residual", ["b1", "s3"], ["r1"]))
    nodes.append(b.node("GlobalAveragePool", "gap", ["r1"], ["g1"]))
    nodes.append(b.node("Flatten", "flatten", ["g1"], ["f1"], [b.attr_i("axis", 1)]))
    add(b.gemm("fc", "f1", "logits", k=8, n=10))
    return b.model("toy_resnet", [1, 3, 16, 16], "logits", [1, 10], nodes, inits)


def toy_concat():
    """Two parallel convs concatenated on channels, pooled, classified."""
    nodes, inits = [], []

    def add(pair):
        n, t = pair
        nodes.append(n)
        inits.extend(t)

    add(b.conv("left", "data", "l1", cin=4, cout=6, k=1, pad=0))
    add(b.conv("right", "data", "r1", cin=4, cout=10, k=3, pad=1))
    nodes.append(
        b.node("Concat", "merge", ["l1", "r1"], ["c1"], [b.attr_i("axis", 1)])
    )
    nodes.append(
        b.node(
            "MaxPool", "pool", ["c1"], ["p1"],
            [b.attr_ints("kernel_shape", [2, 2]), b.attr_ints("strides", [2, 2])],
        )
    )
    nodes.append(b.node("GlobalAveragePool", "gap", ["p1"], ["g1"]))
    nodes.append(b.node("Flatten", "flatten", ["g1"], ["f1"], [b.attr_i("axis", 1)]))
    add(b.gemm("fc", "f1", "logits", k=16, n=5))
    return b.model("toy_concat", [1, 4, 12, 12], "logits", [1, 5], nodes, inits)


def main():
    os.makedirs(FIXTURES, exist_ok=True)
    for model in (tiny_conv(), toy_resnet(), toy_concat()):
        name = model.graph.name
        onnx_path = os.path.join(FIXTURES, f"{name}.onnx")
        ir_path = os.path.join(FIXTURES, f"{name}.ir.json")
        save_model(model, onnx_path)
        obj = to_ir_obj(model, name, device_label="cpu")
        with open(ir_path, "w") as fh:
            fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")))
        print(f"wrote {onnx_path} and {ir_path}")


if __name__ == "__main__":
    main()
