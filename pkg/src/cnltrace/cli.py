"""Command-line front end.

    cnltrace explain --spec PATH [--level 0-4] [--format plain|html|latex]
                     [--max-count N] (--trace STRING | --input PATH | -)
    cnltrace validate --spec PATH [--max-count N]
    cnltrace default-spec

Exit status: 0 on success, 1 on spec or trace errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys

from .errors import CnlError
from .pipeline import DEFAULT_MAX_COUNT, LEVELS, ExplanationPipeline
from .render import FORMATS, render
from .specdsl import default_spec_text, load_spec, validate_spec

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2


def _non_negative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cnltrace", description="Explain traces in controlled English.")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("explain", help="explain one trace")
    ex.add_argument("--spec", required=True, metavar="PATH")
    ex.add_argument("--level", type=int, choices=LEVELS, default=3)
    ex.add_argument("--format", choices=FORMATS, default="plain")
    ex.add_argument("--max-count", type=_non_negative, default=DEFAULT_MAX_COUNT, metavar="N")
    ex.add_argument("--trace", metavar="STRING")
    ex.add_argument("--input", metavar="PATH", help="file holding the trace ('-' for standard input)")
    ex.add_argument("source", nargs="?", choices=["-"], help="read the trace from standard input")

    va = sub.add_parser("validate", help="check a spec file and list its problems")
    va.add_argument("--spec", required=True, metavar="PATH")
    va.add_argument("--max-count", type=_non_negative, default=DEFAULT_MAX_COUNT, metavar="N")

    sub.add_parser("default-spec", help="print the bundled login example spec")
    return parser


def _read_trace(args) -> str | None:
    given = [x for x in (args.trace, args.input, args.source) if x is not None]
    if len(given) != 1:
        return None
    if args.trace is not None:
        return args.trace
    if args.source == "-" or args.input == "-":
        return sys.stdin.read()
    with open(args.input, encoding="utf-8") as fh:
        return fh.read()


def _load(path):
    try:
        return load_spec(path), None
    except CnlError as exc:
        return None, f"{path}:{exc}"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    if args.command == "default-spec":
        sys.stdout.write(default_spec_text())
        return EXIT_OK

    try:
        spec, error = _load(args.spec)
        if error is not None:
            print(error, file=sys.stderr)
            return EXIT_ERROR
        if args.command == "validate":
            diags = validate_spec(spec, args.max_count)
            for d in diags:
                print(f"{args.spec}:{d}", file=sys.stderr)
            return EXIT_ERROR if diags else EXIT_OK

        text = _read_trace(args)
        if text is None:
            print("cnltrace explain: error: give exactly one of --trace, --input or -", file=sys.stderr)
            return EXIT_USAGE
        explanation = ExplanationPipeline(spec, args.max_count).explain(text, args.level)
    except OSError as exc:
        print(f"cnltrace: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except CnlError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    out = render(explanation, args.format)
    sys.stdout.write(out + "\n" if out else "")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
