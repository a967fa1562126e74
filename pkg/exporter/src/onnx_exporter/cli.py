"""``export model.onnx --out model.ir.json [--device-label NAME]``."""

import argparse
import json
import os
import sys

from .convert import to_ir_obj
from .errors import DynamicShape, ExportError, UnsupportedOperator
from .onnx_pb import load_model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="export",
        description="Convert a static-shape ONNX classifier to graph IR JSON",
    )
    parser.add_argument("model", help="path to the .onnx file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument(
        "--device-label",
        help="emit a zero latency entry under this device name for later "
        "profiling to fill in",
    )
    parser.add_argument(
        "--name",
        help="network name in the IR (default: model file stem)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        model = load_model(args.model)
        name = args.name or os.path.splitext(os.path.basename(args.model))[0]
        obj = to_ir_obj(model, name, device_label=args.device_label)
    except (UnsupportedOperator, DynamicShape) as exc:
        print(f"export: {exc}", file=sys.stderr)
        return 2
    except ExportError as exc:
        print(f"export: {exc}", file=sys.stderr)
        return 3
    data = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(data)
    else:
        print(data)
    return 0


if __name__ == "__main__":
    sys.exit(main())
