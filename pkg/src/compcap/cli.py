"""Command-line frontend.

Exit status: 0 on success, 1 on parse/validation errors, 2 on usage
errors. Exponent-gcd warnings go to stderr and never change the exit
status. Output on stdout is byte-deterministic for a given invocation.
"""

import argparse
import sys

from .analysis import (
    Perturbation,
    compare,
    equation_capacity,
    machine_capacity,
    sweep,
    what_if,
)
from .equation import build_equation, gcd_of_exponents
from .ingest import (
    EquationDocument,
    ParseError,
    SpecDocument,
    parse_machine_spec,
    read_document,
    serialize_enumeration,
    serialize_report,
    serialize_sweep,
    serialize_validation,
)
from .model import validate_spec
from .solver import DEFAULT_REL_TOL, enumerate_tasks, int_log2, solve_root

_PERTURB_KINDS = {
    "scale-registers": ("scale_register_file", ("file",), "factor"),
    "scale-cells": ("scale_memory_cells", ("level",), "factor"),
    "set-access": ("set_access_cycles", ("level",), "cycles"),
    "set-execute": ("set_execute_cycles", ("mnemonic",), "cycles"),
    "set-threads": ("set_threads", (), "threads"),
    "scale-coefficient": ("scale_term_coefficient", ("exponent",), "factor"),
    "add-instruction": ("add_instruction_class", (), "cycles"),
}


def _parse_perturbation(text: str, allow_missing_value: bool) -> Perturbation:
    """Parse KEY:k=v,k=v syntax, e.g. scale-registers:file=r,factor=10."""
    key, _, rest = text.partition(":")
    if key not in _PERTURB_KINDS:
        raise argparse.ArgumentTypeError(
            f"unknown perturbation '{key}'; expected one of {', '.join(sorted(_PERTURB_KINDS))}"
        )
    kind, fixed_keys, value_key = _PERTURB_KINDS[key]
    pairs = {}
    for item in filter(None, rest.split(",")):
        k, sep, v = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got '{item}'")
        pairs[k] = v

    def take_int(name: str, required: bool) -> int | None:
        raw = pairs.pop(name, None)
        if raw is None:
            if required:
                raise argparse.ArgumentTypeError(f"perturbation '{key}' needs {name}=N")
            return None
        try:
            return int(raw)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got '{raw}'") from None

    def take_float(name: str, required: bool) -> float | None:
        raw = pairs.pop(name, None)
        if raw is None:
            if required:
                raise argparse.ArgumentTypeError(f"perturbation '{key}' needs {name}=X")
            return None
        try:
            return float(raw)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got '{raw}'") from None

    fields: dict = {"kind": kind}
    for fixed in fixed_keys:
        if fixed == "exponent":
            fields["exponent"] = take_int("exponent", required=True)
        else:
            if fixed not in pairs:
                raise argparse.ArgumentTypeError(f"perturbation '{key}' needs {fixed}=NAME")
            fields[fixed] = pairs.pop(fixed)

    if kind == "add_instruction_class":
        from .model import InstructionClassSpec, OperandSpec

        mnemonic = pairs.pop("mnemonic", "added")
        variants = take_int("variants", required=False) or 1
        cycles = take_int("cycles", required=not allow_missing_value)
        operands = (OperandSpec.immediate(variants),) if variants > 1 else ()
        fields["instruction"] = InstructionClassSpec(
            mnemonic=mnemonic, operands=operands, execute_cycles=cycles if cycles else 1
        )
    elif value_key == "factor":
        fields["factor"] = take_float("factor", required=not allow_missing_value)
    elif value_key == "cycles":
        fields["cycles"] = take_int("cycles", required=not allow_missing_value)
    elif value_key == "threads":
        fields["threads"] = take_int("threads", required=not allow_missing_value)

    if pairs:
        raise argparse.ArgumentTypeError(
            f"unexpected arguments for '{key}': {', '.join(sorted(pairs))}"
        )
    return Perturbation(**fields)


def _perturbation_arg(text: str) -> Perturbation:
    return _parse_perturbation(text, allow_missing_value=False)


def _perturbation_family_arg(text: str) -> Perturbation:
    return _parse_perturbation(text, allow_missing_value=True)


def _values_arg(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"values must be numbers, got '{text}'") from None
    if not values:
        raise argparse.ArgumentTypeError("at least one value is required")
    return values


def _names_arg(text: str) -> list[str]:
    names = [n for n in text.split(",") if n]
    if not names:
        raise argparse.ArgumentTypeError("at least one name is required")
    return names


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _warn_gcd(name: str, gcd: int | None) -> None:
    if gcd is not None and gcd > 1:
        print(
            f"warning: {name}: exponents share common divisor {gcd}; "
            "the sequence-counting interpretation assumes gcd 1",
            file=sys.stderr,
        )


def _document_gcds(doc) -> list[tuple[str, int]]:
    if isinstance(doc, EquationDocument):
        return [(doc.name, gcd_of_exponents(doc.equation))]
    out = []
    for i, group in enumerate(doc.machine.core_groups):
        out.append((f"{doc.machine.name} cores[{i}]", gcd_of_exponents(build_equation(group.core))))
    return out


def _capacity_of(doc, rel_tol: float):
    if isinstance(doc, SpecDocument):
        return machine_capacity(doc.machine, rel_tol)
    return equation_capacity(doc.equation, threads=doc.threads, rel_tol=rel_tol)


def _cmd_capacity(args) -> int:
    doc = read_document(args.input)
    result = _capacity_of(doc, args.tol)
    name = doc.machine.name if isinstance(doc, SpecDocument) else doc.name
    _warn_gcd(name, result.gcd_warning)
    print(serialize_report(result, args.format), end="")
    return 0


def _cmd_compare(args) -> int:
    results = []
    for path in args.inputs:
        doc = read_document(path)
        result = _capacity_of(doc, args.tol)
        name = doc.machine.name if isinstance(doc, SpecDocument) else doc.name
        _warn_gcd(name, result.gcd_warning)
        results.append((name, result.capacity_bits_per_clock))
    report = compare(results, args.baseline, args.lineage)
    print(serialize_report(report, args.format), end="")
    return 0


def _target_of(doc):
    return doc.machine if isinstance(doc, SpecDocument) else doc.equation


def _cmd_whatif(args) -> int:
    doc = read_document(args.input)
    for name, gcd in _document_gcds(doc):
        _warn_gcd(name, gcd)
    report = what_if(_target_of(doc), args.perturb, args.tol)
    print(serialize_report(report, args.format), end="")
    return 0


def _cmd_sweep(args) -> int:
    doc = read_document(args.input)
    for name, gcd in _document_gcds(doc):
        _warn_gcd(name, gcd)
    points = sweep(_target_of(doc), args.perturb, args.values, args.tol)
    print(serialize_sweep(points, args.format), end="")
    return 0


def _cmd_validate(args) -> int:
    if args.input == "-":
        text = sys.stdin.read()
    else:
        with open(args.input, encoding="utf-8") as handle:
            text = handle.read()
    import json

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError([f"line {exc.lineno} column {exc.colno}: {exc.msg}"]) from exc
    if isinstance(doc, dict) and "terms" in doc:
        from .ingest import parse_raw_equation_document
        from .model import ValidationReport

        parse_raw_equation_document(text)  # raises ParseError on problems
        report = ValidationReport(errors=(), warnings=())
    else:
        spec = parse_machine_spec(text, validate=False)
        report = validate_spec(spec)
    print(serialize_validation(report, args.format), end="")
    return 1 if report.errors else 0


def _cmd_enumerate(args) -> int:
    doc = read_document(args.input)
    if not isinstance(doc, EquationDocument):
        raise ParseError([f"{args.input}: enumerate requires a raw-equation input"])
    _warn_gcd(doc.name, gcd_of_exponents(doc.equation))
    count = enumerate_tasks(doc.equation, args.t)
    rate = int_log2(count) / args.t if args.t > 0 and count > 0 else None
    print(serialize_enumeration(args.t, count, rate, args.format), end="")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=("table", "json", "csv"), default="table", help="output format"
    )
    parser.add_argument(
        "--tol", type=float, default=DEFAULT_REL_TOL, metavar="R",
        help="relative root tolerance (default %(default)g)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compcap",
        description="Capacity analysis of processor architecture descriptions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="solve one machine spec or raw equation")
    p.add_argument("input", help="machine-spec or raw-equation JSON file ('-' = stdin)")
    _add_common(p)
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("compare", help="compare several machines against a baseline")
    p.add_argument("inputs", nargs="+", help="input files")
    p.add_argument("--baseline", required=True, help="name of the baseline entry")
    p.add_argument(
        "--lineage", type=_names_arg, default=None, metavar="A,B,...",
        help="chronological ordering for dead-end detection",
    )
    _add_common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("whatif", help="apply one perturbation and report the change")
    p.add_argument("input", help="input file")
    p.add_argument(
        "--perturb", type=_perturbation_arg, required=True, metavar="KEY:k=v,...",
        help="e.g. scale-registers:file=r,factor=10 or set-access:level=RAM,cycles=3",
    )
    _add_common(p)
    p.set_defaults(func=_cmd_whatif)

    p = sub.add_parser("sweep", help="evaluate a perturbation over several values")
    p.add_argument("input", help="input file")
    p.add_argument(
        "--perturb", type=_perturbation_family_arg, required=True, metavar="KEY[:k=v,...]",
        help="perturbation family; the swept value fills its free knob",
    )
    p.add_argument("--values", type=_values_arg, required=True, metavar="V1,V2,...")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate", help="check a description against all invariants")
    p.add_argument("input", help="input file")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("enumerate", help="exact sequence count N(t) for a raw equation")
    p.add_argument("input", help="raw-equation JSON file")
    p.add_argument("--t", type=_nonneg_int, required=True, help="total execution time in cycles")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.set_defaults(func=_cmd_enumerate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        for message in exc.errors:
            print(f"error: {message}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
