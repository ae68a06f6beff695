"""Command-line entry point: ``verify``, ``catalog`` and ``demo`` subcommands."""
from __future__ import annotations

import argparse
import json
import sys
import time

from .catalog import ENTRY_NAMES, list_catalog
from .errors import GeometryError, ValidationError
from .runner import (
    DEFAULT_TOLERANCES,
    demo_scenario,
    load_config,
    render_csv,
    render_json,
    run_scenario,
    validate_config,
)

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _parse_tol(items) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"--tol {item}", "expected <suite>=<value>")
        if name not in DEFAULT_TOLERANCES:
            raise ValidationError(f"tolerance_overrides.{name}", "unknown tolerance name")
        try:
            v = float(value)
        except ValueError:
            raise ValidationError(f"tolerance_overrides.{name}", f"not a number: {value!r}") from None
        if not v >= 0 or v == float("inf"):
            raise ValidationError(f"tolerance_overrides.{name}", "expected a finite non-negative number")
        out[name] = v
    return out


def _run_options(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--samples", type=int, help="override the number of sample points")
    p.add_argument("--tol", action="append", metavar="SUITE=VALUE", help="tolerance override (repeatable)")
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--format", choices=("json", "csv-summary"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conformal-solitons",
        description="Verify Ricci almost soliton identities induced by conformal fields on hypersurfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run the suites of a JSON scenario")
    v.add_argument("config")
    _run_options(v)
    c = sub.add_parser("catalog", help="list the built-in geometries")
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--out")
    d = sub.add_parser("demo", help="run the canonical field scenario of a catalog entry")
    d.add_argument("entry", choices=ENTRY_NAMES)
    d.add_argument("--n", type=int, default=2)
    _run_options(d)
    return parser


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _override(scenario, args):
    data = scenario.to_dict()
    if args.seed is not None:
        data["seed"] = args.seed
    if args.samples is not None:
        data["samples"] = args.samples
    tol = _parse_tol(args.tol)
    if tol:
        data["tolerance_overrides"] = {**data["tolerance_overrides"], **tol}
    if data["field"] is None:
        del data["field"]
    return validate_config(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "catalog":
            _emit(json.dumps(list_catalog(args.n), indent=2, allow_nan=False) + "\n", args.out)
            return EXIT_OK
        if args.command == "verify":
            scenario = _override(load_config(args.config), args)
        else:
            scenario = _override(demo_scenario(args.entry, args.n), args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    start = time.perf_counter()
    report = run_scenario(scenario)
    elapsed = time.perf_counter() - start
    text = render_json(report) if args.format == "json" else render_csv(report)
    _emit(text, args.out)
    run = report["run"]
    print(
        f"{scenario.geometry} n={scenario.n} seed={scenario.seed}: "
        f"{run['evaluated_points']}/{run['samples']} points, {run['point_errors']} point errors, "
        f"wall time {elapsed:.2f}s",
        file=sys.stderr,
    )
    for name, s in report["suites"].items():
        state = "n/a" if s["pass"] is None else ("pass" if s["pass"] else "FAIL")
        print(f"  {name:<13} {state:<5} residual={s['max_residual']}", file=sys.stderr)
    return EXIT_OK if report["all_pass"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
