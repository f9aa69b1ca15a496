"""figgen render --fig <id> --in <dir> --out <path>"""
from __future__ import annotations

import argparse
import sys

from .figures import render
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="figgen",
                                description="Render figures from simulator CSV outputs")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("render", help="render one figure")
    sp.add_argument("--fig", required=True, choices=["fig1", "fig2", "fig3", "fig4"])
    sp.add_argument("--in", dest="in_dir", required=True, help="directory of run outputs")
    sp.add_argument("--out", required=True, help="output image path (.svg, .png, .pdf)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.fig, args.in_dir, args.out)
    except (SchemaError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
