"""Command-line interface: render one figure from a set of flight logs.

    dwa3d-plot --kind TopView --logs "logs/wall-*.log" --out wall_top.png
"""

from __future__ import annotations

import argparse
import glob
import sys
from pathlib import Path

from .figures import KINDS, FigureRequest, render
from .logdata import LogSchemaError

EXIT_USAGE = 64


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dwa3d-plot",
        description="Render a figure from dwa3d flight logs.",
    )
    p.add_argument("--kind", required=True, choices=KINDS,
                   help="figure kind to render")
    p.add_argument("--logs", required=True, metavar="GLOB",
                   help="glob matching the input flight logs")
    p.add_argument("--out", required=True, metavar="PATH", type=Path,
                   help="output image path (PNG)")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else int(exc.code or 0)
    paths = sorted(glob.glob(args.logs))
    if not paths:
        print(f"error: no files match {args.logs!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        out = render(FigureRequest(log_paths=paths, kind=args.kind,
                                   out_path=args.out))
    except (LogSchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
