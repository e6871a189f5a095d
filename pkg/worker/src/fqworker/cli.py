"""Worker entry point: `fqworker --port P --mode threshold|model [--model PATH] [--classes N]`."""

from __future__ import annotations

import argparse
import logging
import sys

from .model import ModelError
from .server import WorkerConfig, serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fqworker",
        description="Segmentation inference worker for the furrowquant binary protocol.",
    )
    parser.add_argument("--port", type=int, required=True, help="TCP port (0 picks a free one)")
    parser.add_argument("--mode", choices=("threshold", "model"), default="threshold")
    parser.add_argument("--model", help="ONNX inference graph (model mode)")
    parser.add_argument("--classes", type=int, default=3, help="class count of the scheme")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        config = WorkerConfig(
            port=args.port, mode=args.mode, model_path=args.model, class_count=args.classes
        )
        serve(config)
    except (ValueError, ModelError) as exc:
        print(f"fqworker: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"fqworker: cannot bind port {args.port}: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())
