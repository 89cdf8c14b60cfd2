"""Command-line surface: compose, tensor, convert, graybox, simulate, check.

Exit codes: 0 on success, 2 on a domain or validation error, 3 on an I/O
or parse error.  The environment variable OPENCOSPAN_ISO_BUDGET bounds the
node count of isomorphism searches.
"""

from __future__ import annotations

import argparse
import sys
from functools import reduce
from typing import Optional, Sequence, Union

from .errors import KindError, ModelFormatError, ModelValidationError, OpenCospanError
from .finset import FinFunction, FinSet
from .cospans import (
    Cospan,
    check_companion,
    check_conjoint,
    cospan_iso,
    hcompose,
    tensor,
    to_decorated,
    to_structured,
    StructuredCospan,
)
from .dynamics import OpenDynam, compose_open_dynam, graybox, open_dynam_iso, simulate
from .laws import LAW_SUITES, LawReport
from .modelio import (
    ModelFile,
    load_model,
    load_sim_config,
    resolve_simulation,
    save_model,
    trajectory_to_csv,
)


def _fold_command(args: argparse.Namespace, op, op_name: str) -> int:
    if len(args.files) < 2:
        raise ModelValidationError(f"{op_name} needs at least two model files")
    models = [load_model(path) for path in args.files]
    payloads = [m.payload for m in models]
    if all(isinstance(p, OpenDynam) for p in payloads):
        if op is not hcompose:
            raise KindError(f"{op_name} does not operate on dynam models")
        combined: Union[Cospan, OpenDynam] = reduce(compose_open_dynam, payloads)
    elif any(isinstance(p, OpenDynam) for p in payloads):
        raise KindError(f"cannot {op_name} dynam models with other kinds")
    else:
        combined = reduce(op, payloads)
    save_model(args.out, ModelFile(models[0].kind, combined))
    return 0


def _cmd_compose(args: argparse.Namespace) -> int:
    return _fold_command(args, hcompose, "compose")


def _cmd_tensor(args: argparse.Namespace) -> int:
    return _fold_command(args, tensor, "tensor")


def _cmd_convert(args: argparse.Namespace) -> int:
    model = load_model(args.file)
    payload = model.payload
    if isinstance(payload, OpenDynam):
        raise KindError("dynam models only have a decorated representation")
    if args.to == "structured":
        converted: Cospan = (
            payload if isinstance(payload, StructuredCospan) else to_structured(payload)
        )
    else:
        converted = (
            payload if not isinstance(payload, StructuredCospan) else to_decorated(payload)
        )
    save_model(args.out, ModelFile(model.kind, converted, model.names))
    return 0


def _cmd_graybox(args: argparse.Namespace) -> int:
    model = load_model(args.file)
    if isinstance(model.payload, OpenDynam):
        raise KindError("model is already a dynam model")
    system = graybox(model.payload)
    save_model(args.out, ModelFile("dynam", system, model.names))
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    model = load_model(args.file)
    config = load_sim_config(args.config)
    system, schedule, initial, names = resolve_simulation(model, config)
    trajectory = simulate(system, schedule, initial, config.t0, config.t1, config.dt)
    assert names.places is not None
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(trajectory_to_csv(trajectory, names.places))
    return 0


def _parse_map(raw: str, cod: Optional[int]) -> FinFunction:
    entries = [token.strip() for token in raw.split(",") if token.strip() != ""]
    try:
        table = tuple(int(token) for token in entries)
    except ValueError:
        raise ModelFormatError(
            f"--map must be a comma-separated list of ints, got {raw!r}"
        ) from None
    size = cod if cod is not None else (max(table) + 1 if table else 0)
    try:
        return FinFunction(FinSet(len(table)), FinSet(size), table)
    except ValueError as exc:
        raise ModelValidationError(str(exc)) from exc


def _normalized(model: ModelFile) -> Union[Cospan, OpenDynam]:
    if isinstance(model.payload, StructuredCospan):
        return to_decorated(model.payload)
    return model.payload


def _check_iso(args: argparse.Namespace) -> LawReport:
    if len(args.files) != 2:
        raise ModelValidationError("the iso check needs exactly two model files")
    a, b = (_normalized(load_model(path)) for path in args.files)
    if isinstance(a, OpenDynam) and isinstance(b, OpenDynam):
        found = open_dynam_iso(a, b) is not None
    elif isinstance(a, OpenDynam) or isinstance(b, OpenDynam):
        found = False
    else:
        found = cospan_iso(a, b) is not None
    return LawReport(
        "iso", found, 1, "" if found else "no isomorphism over the shared feet"
    )


def _cmd_check(args: argparse.Namespace) -> int:
    requested = [name.strip() for name in args.laws.split(",") if name.strip()]
    if not requested:
        raise ModelFormatError("no laws requested")
    reports: list[LawReport] = []
    for name in requested:
        if name == "all":
            reports.extend(law() for law in LAW_SUITES.values())
        elif name == "iso":
            reports.append(_check_iso(args))
        elif name in ("companion", "conjoint") and args.map is not None:
            f = _parse_map(args.map, args.cod)
            check = check_companion if name == "companion" else check_conjoint
            ok, why = check(f)
            reports.append(LawReport(name, ok, 1, why))
        elif name in LAW_SUITES:
            reports.append(LAW_SUITES[name]())
        else:
            raise ModelFormatError(
                f"unknown law {name!r}; choose from {', '.join(sorted(LAW_SUITES))}, "
                "iso, or all"
            )
    for report in reports:
        print(report.line())
    return 0 if all(r.passed for r in reports) else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opencospan",
        description="Compose, convert, gray-box, and simulate open systems stored as JSON.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compose_p = sub.add_parser("compose", help="glue models end to end, left to right")
    compose_p.add_argument("files", nargs="+", help="model files, composed in order")
    compose_p.add_argument("--out", "-o", required=True, help="output model file")
    compose_p.set_defaults(handler=_cmd_compose)

    tensor_p = sub.add_parser("tensor", help="put models side by side")
    tensor_p.add_argument("files", nargs="+")
    tensor_p.add_argument("--out", "-o", required=True)
    tensor_p.set_defaults(handler=_cmd_tensor)

    convert_p = sub.add_parser("convert", help="switch between the two presentations")
    convert_p.add_argument("file")
    convert_p.add_argument("--to", required=True, choices=("structured", "decorated"))
    convert_p.add_argument("--out", "-o", required=True)
    convert_p.set_defaults(handler=_cmd_convert)

    graybox_p = sub.add_parser("graybox", help="turn a rated open net into open ODEs")
    graybox_p.add_argument("file")
    graybox_p.add_argument("--out", "-o", required=True)
    graybox_p.set_defaults(handler=_cmd_graybox)

    simulate_p = sub.add_parser("simulate", help="integrate an open system to CSV")
    simulate_p.add_argument("file")
    simulate_p.add_argument("--config", required=True, help="JSON simulation config")
    simulate_p.add_argument("--out", "-o", required=True, help="CSV trajectory output")
    simulate_p.set_defaults(handler=_cmd_simulate)

    check_p = sub.add_parser("check", help="run law suites and validations")
    check_p.add_argument("files", nargs="*", help="model files, for the iso check")
    check_p.add_argument(
        "--laws",
        required=True,
        help="comma-separated law names, or 'all'; 'iso' compares two files; "
        "'companion'/'conjoint' with --map check one function",
    )
    check_p.add_argument("--map", help="function table for companion/conjoint, e.g. 0,0")
    check_p.add_argument("--cod", type=int, help="codomain size for --map")
    check_p.set_defaults(handler=_cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OpenCospanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
