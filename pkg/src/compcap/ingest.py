"""
On-disk formats and report serialization.

Machine specs and raw equations are JSON; raw-equation coefficients are
decimal strings so arbitrary precision survives the trip. Reports
serialize to json (full precision), csv (pipeline-friendly) or table
(human-readable, three decimals to match typical published precision).
All output is deterministic: same input, same bytes.
"""

import json
from dataclasses import dataclass

from .analysis import ComparisonReport, WhatIfReport
from .equation import CharacteristicEquation, Term, canonicalize
from .model import (
    CoreGroup,
    CoreSpec,
    InstructionClassSpec,
    MachineSpec,
    MemoryHierarchySpec,
    MemoryLevelSpec,
    OperandSpec,
    RegisterFileSpec,
    ValidationReport,
    validate_spec,
)
from .solver import CapacityResult

FORMATS = ("json", "csv", "table")


class ParseError(ValueError):
    """Parse or validation failure; carries every collected problem."""

    def __init__(self, errors: list[str] | tuple[str, ...]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) if self.errors else "parse failed")


@dataclass(frozen=True)
class SpecDocument:
    """A machine spec plus where it came from, for error reporting."""

    machine: MachineSpec
    source: str


@dataclass(frozen=True)
class EquationDocument:
    """A raw characteristic equation with its document metadata."""

    name: str
    equation: CharacteristicEquation
    threads: int
    source: str


class _Checker:
    """Accumulates schema errors with JSON-path locations."""

    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def require(self, obj: dict, key: str, kind, path: str, optional: bool = False):
        if key not in obj:
            if not optional:
                self.fail(path, f"missing required key '{key}'")
            return None
        value = obj[key]
        if kind is int:
            # bool is an int subclass; reject it explicitly
            if isinstance(value, bool) or not isinstance(value, int):
                self.fail(path, f"'{key}' must be an integer")
                return None
        elif kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.fail(path, f"'{key}' must be a number")
                return None
            value = float(value)
        elif not isinstance(value, kind):
            self.fail(path, f"'{key}' must be {kind.__name__}")
            return None
        return value


def _loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError([f"line {exc.lineno} column {exc.colno}: {exc.msg}"]) from exc
    if not isinstance(doc, dict):
        raise ParseError(["top level must be a JSON object"])
    return doc


def _parse_operand(raw, path: str, check: _Checker) -> OperandSpec | None:
    if not isinstance(raw, dict):
        check.fail(path, "operand must be an object")
        return None
    kind = check.require(raw, "kind", str, path)
    if kind == "register":
        file = check.require(raw, "file", str, path)
        return OperandSpec.register(file) if file is not None else None
    if kind == "memory":
        return OperandSpec.memory()
    if kind == "immediate":
        domain = check.require(raw, "domain", int, path)
        return OperandSpec.immediate(domain) if domain is not None else None
    if kind is not None:
        check.fail(path, f"unknown operand kind '{kind}'")
    return None


def _parse_core(raw: dict, path: str, check: _Checker) -> tuple[CoreSpec | None, int]:
    count = check.require(raw, "count", int, path)
    threads = check.require(raw, "threads", int, path, optional=True)
    stages = check.require(raw, "stage_throughputs", list, path, optional=True)
    if stages is not None and not all(isinstance(s, int) and not isinstance(s, bool) for s in stages):
        check.fail(path, "'stage_throughputs' must be a list of integers")
        stages = None

    register_files = []
    raw_files = check.require(raw, "register_files", list, path)
    for i, rf in enumerate(raw_files or []):
        at = f"{path}.register_files[{i}]"
        if not isinstance(rf, dict):
            check.fail(at, "register file must be an object")
            continue
        name = check.require(rf, "name", str, at)
        size = check.require(rf, "count", int, at)
        if name is not None and size is not None:
            register_files.append(RegisterFileSpec(name=name, count=size))

    levels = []
    raw_memory = check.require(raw, "memory", list, path)
    for i, lv in enumerate(raw_memory or []):
        at = f"{path}.memory[{i}]"
        if not isinstance(lv, dict):
            check.fail(at, "memory level must be an object")
            continue
        name = check.require(lv, "name", str, at)
        cells = check.require(lv, "cells", int, at)
        access = check.require(lv, "access_cycles", int, at)
        if None not in (name, cells, access):
            levels.append(MemoryLevelSpec(name=name, cells=cells, access_cycles=access))

    instructions = []
    raw_instructions = check.require(raw, "instructions", list, path)
    for i, ins in enumerate(raw_instructions or []):
        at = f"{path}.instructions[{i}]"
        if not isinstance(ins, dict):
            check.fail(at, "instruction must be an object")
            continue
        mnemonic = check.require(ins, "mnemonic", str, at)
        cycles = check.require(ins, "cycles", int, at)
        raw_ops = check.require(ins, "operands", list, at)
        operands = []
        for j, op in enumerate(raw_ops or []):
            parsed = _parse_operand(op, f"{at}.operands[{j}]", check)
            if parsed is not None:
                operands.append(parsed)
        if mnemonic is not None and cycles is not None and raw_ops is not None:
            instructions.append(
                InstructionClassSpec(
                    mnemonic=mnemonic, operands=tuple(operands), execute_cycles=cycles
                )
            )

    core = CoreSpec(
        register_files=tuple(register_files),
        memory=MemoryHierarchySpec(levels=tuple(levels)),
        instructions=tuple(instructions),
        threads=threads if threads is not None else 1,
        stage_throughputs=tuple(stages) if stages is not None else None,
    )
    return core, count if count is not None else 1


def parse_machine_spec(text: str, validate: bool = True) -> MachineSpec:
    """Parse a machine-spec JSON document.

    Raises ParseError listing every schema problem (with JSON paths) or,
    when validate is true, every invariant violation found by
    validate_spec.
    """
    doc = _loads(text)
    check = _Checker()
    name = check.require(doc, "name", str, "machine")
    clock = check.require(doc, "clock_ghz", float, "machine", optional=True)
    raw_cores = check.require(doc, "cores", list, "machine")

    groups = []
    for i, raw in enumerate(raw_cores or []):
        path = f"cores[{i}]"
        if not isinstance(raw, dict):
            check.fail(path, "core must be an object")
            continue
        core, count = _parse_core(raw, path, check)
        if core is not None:
            groups.append(CoreGroup(core=core, count=count))

    if check.errors:
        raise ParseError(check.errors)
    spec = MachineSpec(name=name, core_groups=tuple(groups), clock_ghz=clock)
    if validate:
        report = validate_spec(spec)
        if report.errors:
            raise ParseError(report.errors)
    return spec


def serialize_machine_spec(spec: MachineSpec) -> str:
    """Inverse of parse_machine_spec: parse(serialize(spec)) == spec."""
    def operand(op: OperandSpec) -> dict:
        if op.kind == "register":
            return {"kind": "register", "file": op.file}
        if op.kind == "memory":
            return {"kind": "memory"}
        return {"kind": "immediate", "domain": op.domain}

    doc: dict = {"name": spec.name}
    if spec.clock_ghz is not None:
        doc["clock_ghz"] = spec.clock_ghz
    doc["cores"] = []
    for group in spec.core_groups:
        core = group.core
        entry: dict = {"count": group.count, "threads": core.threads}
        if core.stage_throughputs is not None:
            entry["stage_throughputs"] = list(core.stage_throughputs)
        entry["register_files"] = [
            {"name": rf.name, "count": rf.count} for rf in core.register_files
        ]
        entry["memory"] = [
            {"name": lv.name, "cells": lv.cells, "access_cycles": lv.access_cycles}
            for lv in core.memory.levels
        ]
        entry["instructions"] = [
            {
                "mnemonic": ins.mnemonic,
                "cycles": ins.execute_cycles,
                "operands": [operand(op) for op in ins.operands],
            }
            for ins in core.instructions
        ]
        doc["cores"].append(entry)
    return json.dumps(doc, indent=2) + "\n"


def _parse_terms(doc: dict) -> CharacteristicEquation:
    check = _Checker()
    raw_terms = check.require(doc, "terms", list, "equation")
    if check.errors:
        raise ParseError(check.errors)
    if not raw_terms:
        raise ParseError(["equation: 'terms' must be non-empty"])
    terms = []
    for i, raw in enumerate(raw_terms):
        at = f"terms[{i}]"
        if not isinstance(raw, dict):
            check.fail(at, "term must be an object")
            continue
        exponent = check.require(raw, "exponent", int, at)
        coefficient = raw.get("coefficient")
        if isinstance(coefficient, str):
            if not coefficient.isdigit():
                check.fail(at, "'coefficient' must be a decimal digit string")
                coefficient = None
            else:
                coefficient = int(coefficient)
        elif isinstance(coefficient, bool) or not isinstance(coefficient, int):
            check.fail(at, "'coefficient' must be a decimal string or integer")
            coefficient = None
        if coefficient is not None and coefficient < 1:
            check.fail(at, "'coefficient' must be >= 1")
            coefficient = None
        if exponent is not None and exponent < 1:
            check.fail(at, "'exponent' must be >= 1")
            exponent = None
        if coefficient is not None and exponent is not None:
            terms.append(Term(coefficient, exponent))
    if check.errors:
        raise ParseError(check.errors)
    return canonicalize(terms)


def parse_raw_equation(text: str) -> CharacteristicEquation:
    """Parse a raw-equation JSON document into a canonical equation."""
    return _parse_terms(_loads(text))


def parse_raw_equation_document(text: str, source: str = "<string>") -> EquationDocument:
    """Like parse_raw_equation but keeping the name and thread count."""
    doc = _loads(text)
    check = _Checker()
    name = check.require(doc, "name", str, "equation")
    threads = check.require(doc, "threads", int, "equation", optional=True)
    if threads is not None and threads < 1:
        check.fail("equation", "'threads' must be >= 1")
    if check.errors:
        raise ParseError(check.errors)
    equation = _parse_terms(doc)
    return EquationDocument(
        name=name, equation=equation, threads=threads if threads is not None else 1, source=source
    )


def serialize_raw_equation(
    eq: CharacteristicEquation, name: str = "equation", threads: int | None = None
) -> str:
    """Inverse of parse_raw_equation; coefficients become decimal
    strings."""
    doc: dict = {"name": name}
    if threads is not None:
        doc["threads"] = threads
    doc["terms"] = [
        {"coefficient": str(term.coefficient), "exponent": term.exponent} for term in eq.terms
    ]
    return json.dumps(doc, indent=2) + "\n"


def read_document(path: str) -> SpecDocument | EquationDocument:
    """Load a machine spec or raw equation from a file ('-' = stdin),
    deciding by which top-level key is present."""
    if path == "-":
        import sys

        text = sys.stdin.read()
        source = "<stdin>"
    else:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
        source = path
    doc = _loads(text)
    if "cores" in doc:
        return SpecDocument(machine=parse_machine_spec(text), source=source)
    if "terms" in doc:
        return parse_raw_equation_document(text, source=source)
    raise ParseError([f"{source}: expected a machine spec ('cores') or raw equation ('terms')"])


def _json_dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _table(rows: list[tuple[str, str]]) -> str:
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label:<{width}}  {value}" for label, value in rows) + "\n"


def _fmt(value: float | int | None, decimals: int = 3) -> str:
    if value is None:
        return "-"
    if isinstance(value, int):
        return str(value)
    return f"{value:.{decimals}f}"


def _capacity_payload(result: CapacityResult) -> dict:
    return {
        "root": result.root,
        "capacity_bits_per_clock": result.capacity_bits_per_clock,
        "single_thread_capacity": result.single_thread_capacity,
        "threads": result.threads,
        "cores": result.cores,
        "iterations": result.iterations,
        "bracket": list(result.bracket),
        "residual": result.residual,
        "gcd_warning": result.gcd_warning,
        "bits_per_second": result.bits_per_second,
    }


def _capacity_table(result: CapacityResult) -> str:
    rows = [
        ("root", _fmt(result.root)),
        ("capacity (bits/clock)", _fmt(result.capacity_bits_per_clock)),
        ("single-thread capacity", _fmt(result.single_thread_capacity)),
        ("threads", str(result.threads)),
        ("cores", str(result.cores)),
    ]
    if result.bits_per_second is not None:
        rows.append(("bits/second", f"{result.bits_per_second:.3e}"))
    if result.gcd_warning is not None:
        rows.append(("gcd warning", str(result.gcd_warning)))
    rows.extend([
        ("iterations", str(result.iterations)),
        ("residual", f"{result.residual:.2e}"),
    ])
    return _table(rows)


_CAPACITY_COLUMNS = (
    "root",
    "capacity_bits_per_clock",
    "single_thread_capacity",
    "threads",
    "cores",
    "iterations",
    "residual",
    "gcd_warning",
    "bits_per_second",
)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def _capacity_csv(result: CapacityResult) -> str:
    payload = _capacity_payload(result)
    header = ",".join(_CAPACITY_COLUMNS)
    row = ",".join(_csv_cell(payload[c]) for c in _CAPACITY_COLUMNS)
    return header + "\n" + row + "\n"


_WHATIF_COLUMNS = (
    "baseline_capacity",
    "perturbed_capacity",
    "delta",
    "relative_change",
    "first_order_estimate",
)


def _whatif_payload(report: WhatIfReport) -> dict:
    return {c: getattr(report, c) for c in _WHATIF_COLUMNS}


def _whatif_table(report: WhatIfReport) -> str:
    return _table([
        ("baseline capacity (bits/clock)", _fmt(report.baseline_capacity)),
        ("perturbed capacity (bits/clock)", _fmt(report.perturbed_capacity)),
        ("delta", _fmt(report.delta)),
        ("relative change", _fmt(report.relative_change)),
        ("first-order estimate", _fmt(report.first_order_estimate)),
    ])


def _comparison_payload(report: ComparisonReport) -> dict:
    return {
        "baseline": report.baseline,
        "entries": [
            {"name": e.name, "capacity": e.capacity, "relative": e.relative}
            for e in report.entries
        ],
        "regressions": [list(pair) for pair in report.regressions],
    }


def _comparison_table(report: ComparisonReport) -> str:
    name_width = max(len("name"), max(len(e.name) for e in report.entries))
    lines = [f"{'name':<{name_width}}  {'capacity':>10}  {'relative':>8}"]
    for entry in report.entries:
        lines.append(
            f"{entry.name:<{name_width}}  {entry.capacity:>10.3f}  {entry.relative:>8.3f}"
        )
    lines.append(f"baseline: {report.baseline}")
    if report.regressions:
        flagged = ", ".join(f"{a} -> {b}" for a, b in report.regressions)
        lines.append(f"regressions (dead-end candidates): {flagged}")
    return "\n".join(lines) + "\n"


def _comparison_csv(report: ComparisonReport) -> str:
    lines = ["name,capacity,relative"]
    for entry in report.entries:
        lines.append(f"{entry.name},{_csv_cell(entry.capacity)},{_csv_cell(entry.relative)}")
    return "\n".join(lines) + "\n"


def serialize_report(
    report: CapacityResult | WhatIfReport | ComparisonReport, format: str = "table"
) -> str:
    """Render a report deterministically in the requested format."""
    if format not in FORMATS:
        raise ValueError(f"unknown format '{format}'; expected one of {FORMATS}")
    if isinstance(report, CapacityResult):
        if format == "json":
            return _json_dumps(_capacity_payload(report))
        if format == "csv":
            return _capacity_csv(report)
        return _capacity_table(report)
    if isinstance(report, WhatIfReport):
        if format == "json":
            return _json_dumps(_whatif_payload(report))
        if format == "csv":
            header = ",".join(_WHATIF_COLUMNS)
            row = ",".join(_csv_cell(getattr(report, c)) for c in _WHATIF_COLUMNS)
            return header + "\n" + row + "\n"
        return _whatif_table(report)
    if isinstance(report, ComparisonReport):
        if format == "json":
            return _json_dumps(_comparison_payload(report))
        if format == "csv":
            return _comparison_csv(report)
        return _comparison_table(report)
    raise TypeError(f"cannot serialize {type(report).__name__}")


def serialize_validation(report: ValidationReport, format: str = "table") -> str:
    if format not in FORMATS:
        raise ValueError(f"unknown format '{format}'; expected one of {FORMATS}")
    if format == "json":
        return _json_dumps({"errors": list(report.errors), "warnings": list(report.warnings)})
    if format == "csv":
        lines = ["severity,message"]
        lines.extend(f"error,{msg}" for msg in report.errors)
        lines.extend(f"warning,{msg}" for msg in report.warnings)
        return "\n".join(lines) + "\n"
    lines = []
    lines.extend(f"error: {msg}" for msg in report.errors)
    lines.extend(f"warning: {msg}" for msg in report.warnings)
    if not lines:
        lines = ["no errors"]
    return "\n".join(lines) + "\n"


def serialize_sweep(points: list[tuple[float, float]], format: str = "table") -> str:
    if format not in FORMATS:
        raise ValueError(f"unknown format '{format}'; expected one of {FORMATS}")
    if format == "json":
        return _json_dumps([{"value": v, "capacity": c} for v, c in points])
    if format == "csv":
        lines = ["value,capacity"]
        lines.extend(f"{_csv_cell(v)},{_csv_cell(c)}" for v, c in points)
        return "\n".join(lines) + "\n"
    lines = [f"{'value':>12}  {'capacity':>10}"]
    lines.extend(f"{v:>12g}  {c:>10.3f}" for v, c in points)
    return "\n".join(lines) + "\n"


def serialize_enumeration(t: int, count: int, rate: float | None, format: str = "table") -> str:
    if format not in FORMATS:
        raise ValueError(f"unknown format '{format}'; expected one of {FORMATS}")
    if format == "json":
        return _json_dumps({
            "t": t,
            "count": str(count),
            "bits_per_clock": rate,
        })
    if format == "csv":
        return "t,count,bits_per_clock\n" + f"{t},{count},{_csv_cell(rate)}\n"
    return _table([
        (f"N({t})", str(count)),
        ("log2 N / t", _fmt(rate)),
    ])
