"""fml-fig <spec.json>: render one figure from an artifact directory.

The spec file is JSON: {"input_dir": ..., "kind": ..., "output": ...,
"format": "svg"|"png"}.  Exit codes: 0 success, 2 spec/schema error.
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, FigureSpec, SchemaError, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fml-fig", description=__doc__)
    parser.add_argument("spec", help="JSON figure spec")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.from_json(args.spec)
        out = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
