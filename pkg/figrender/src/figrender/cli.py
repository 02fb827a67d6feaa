"""figrender CLI: render every panel in a JSON manifest."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .panels import RenderError, load_manifest, render_all


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figrender",
        description="Render experiment CSVs into SVG line-chart panels.")
    parser.add_argument("manifest", help="JSON array of panel specs")
    parser.add_argument("--out-dir", default=None,
                        help="base directory for csv/output paths "
                             "(default: the manifest's directory)")
    args = parser.parse_args(argv)
    manifest = Path(args.manifest)
    base = Path(args.out_dir) if args.out_dir else manifest.parent
    try:
        specs = load_manifest(manifest)
        index = render_all(specs, base)
    except (RenderError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {index}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
