"""Exporter command line: one ``export`` subcommand, report JSON on stdout."""

from __future__ import annotations

import argparse
import json
import sys

from .export import ExportError, export_model

EXIT_OK = 0
EXIT_USAGE = 64
EXIT_DATA = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> _Parser:
    parser = _Parser(prog="nnexport", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="convert a saved Keras model")
    p.add_argument("--in", dest="source", required=True, help="model.h5 / model.keras / saved dir")
    p.add_argument("--out", dest="output", required=True, help="destination model.json")
    p.add_argument("--dtype", default="rational", choices=["rational"])
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = export_model(args.source, args.output, dtype=args.dtype)
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(json.dumps(report.to_document(), indent=1))
    mapped = len(report.layer_mapping)
    print(
        f"exported {mapped} layers ({len(report.dropped)} dropped) -> {report.output_path}",
        file=sys.stderr,
    )
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
