"""Command-line client over the report handlers.

The CLI is a thin shim: it parses arguments, loads the input document,
calls the same handler functions the HTTP service exposes, and writes the
response.  Exit codes: 0 success, 2 invalid input, 3 precondition unmet
(non-hyperbolic, non-invariant slope, unstable where unsupported),
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .errors import InvalidInput, NumericalFailure, PreconditionError

EXIT_INVALID = 2
EXIT_PRECONDITION = 3
EXIT_NUMERICAL = 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="aiet",
        description="dimension and regularity reports for affine interval "
                    "exchange maps of periodic type")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str, simulate: bool = False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", help="input JSON document")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--tol-override", action="append", default=[],
                       metavar="KEY=VAL", help="override a named tolerance")
        if simulate:
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--length", type=int, default=1_000_000)
            p.add_argument("--side", choices=("invariant", "conformal"),
                           default="invariant")
        return p

    add("classify", "genus, singularities, hyperbolicity, slope class")
    add("dims", "Hausdorff dimensions with cross-checks")
    add("holder", "supremal Holder exponents of the conjugacy and inverse")
    add("sweep", "thermodynamic sweep over the t-grid of the document (CSV)")
    add("simulate", "Monte-Carlo estimate of G or H against the closed form",
        simulate=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return ap


def _apply_overrides(bundle_path: str, overrides: list[str]):
    from .specfile import build_bundle, parse_spec
    with open(bundle_path, "rb") as fh:
        spec = parse_spec(fh.read())
    if overrides:
        tols = dict(spec.tolerances or {})
        for item in overrides:
            if "=" not in item:
                raise InvalidInput(f"--tol-override expects KEY=VAL, got {item!r}")
            key, val = item.split("=", 1)
            try:
                tols[key] = float(val)
            except ValueError:
                raise InvalidInput(f"tolerance value for {key!r} is not a number: {val!r}")
        # revalidate so unknown keys are rejected like any other bad input
        spec = parse_spec(spec.model_dump() | {"tolerances": tols})
    return build_bundle(spec)


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(model, out: Optional[str]):
    _emit(json.dumps(model.model_dump(by_alias=True), indent=2) + "\n", out)


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    from . import service

    try:
        if args.command == "serve":
            try:
                import uvicorn
            except ImportError:
                print("the 'serve' command needs uvicorn (pip install uvicorn)",
                      file=sys.stderr)
                return EXIT_INVALID
            uvicorn.run(service.app, host=args.host, port=args.port)
            return 0

        bundle = _apply_overrides(args.file, args.tol_override)
        if args.command == "classify":
            _emit_json(service.handle_classify(bundle), args.out)
        elif args.command == "dims":
            _emit_json(service.handle_dims(bundle), args.out)
        elif args.command == "holder":
            _emit_json(service.handle_holder(bundle), args.out)
        elif args.command == "sweep":
            resp = service.handle_sweep(bundle)
            _emit(resp.csv, args.out)
            if args.out:
                with open(args.out + ".sidecar.json", "w") as fh:
                    json.dump(resp.sidecar, fh, indent=2)
                    fh.write("\n")
        elif args.command == "simulate":
            resp = service.handle_simulate(bundle, args.side, args.length, args.seed)
            _emit_json(resp, args.out)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
