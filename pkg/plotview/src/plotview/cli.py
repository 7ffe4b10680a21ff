"""plotview: render scene JSON files to SVG or PNG figures.

Usage: plotview render scene.json out.svg [--format svg|png]

Exit codes: 0 on success, 2 when the scene fails validation (the failing
JSON pointer is printed to stderr).
"""

from __future__ import annotations

import argparse
import json
import sys

from .render import SceneError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotview",
                                     description="Batch scene-figure renderer.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render a scene file to a figure")
    p.add_argument("scene", help="input scene JSON path")
    p.add_argument("output", help="output figure path")
    p.add_argument("--format", choices=("svg", "png"), default=None,
                   help="output format (default: from the output extension)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or ("png" if args.output.lower().endswith(".png") else "svg")
    try:
        render(args.scene, args.output, fmt)
    except SceneError as exc:
        print(f"invalid scene at {exc.pointer}: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read scene: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
