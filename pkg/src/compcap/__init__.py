"""Capacity analysis of processor architectures.

Build the characteristic equation of a declaratively described machine,
solve it for the dominant root, and turn the log of that root into an
upper-bound throughput measure in bits per clock cycle. Includes
what-if perturbation analysis, machine comparison with dead-end
detection, and an exact sequence-counting oracle.
"""

from .analysis import (
    ComparisonEntry,
    ComparisonReport,
    Perturbation,
    WhatIfReport,
    apply_perturbation,
    compare,
    core_capacity,
    equation_capacity,
    machine_capacity,
    sweep,
    what_if,
)
from .equation import (
    CharacteristicEquation,
    Term,
    build_equation,
    canonicalize,
    expand_core,
    expand_instruction,
    gcd_of_exponents,
)
from .ingest import (
    EquationDocument,
    ParseError,
    SpecDocument,
    parse_machine_spec,
    parse_raw_equation,
    parse_raw_equation_document,
    read_document,
    serialize_machine_spec,
    serialize_raw_equation,
    serialize_report,
)
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
    derive_thread_count,
    validate_spec,
)
from .solver import (
    CapacityResult,
    capacity_from_root,
    enumerate_tasks,
    evaluate_lhs,
    int_log2,
    root_sensitivity,
    solve_root,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityResult",
    "CharacteristicEquation",
    "ComparisonEntry",
    "ComparisonReport",
    "CoreGroup",
    "CoreSpec",
    "EquationDocument",
    "InstructionClassSpec",
    "MachineSpec",
    "MemoryHierarchySpec",
    "MemoryLevelSpec",
    "OperandSpec",
    "ParseError",
    "Perturbation",
    "RegisterFileSpec",
    "SpecDocument",
    "Term",
    "ValidationReport",
    "WhatIfReport",
    "apply_perturbation",
    "build_equation",
    "canonicalize",
    "capacity_from_root",
    "compare",
    "core_capacity",
    "derive_thread_count",
    "enumerate_tasks",
    "equation_capacity",
    "evaluate_lhs",
    "expand_core",
    "expand_instruction",
    "gcd_of_exponents",
    "int_log2",
    "machine_capacity",
    "parse_machine_spec",
    "parse_raw_equation",
    "parse_raw_equation_document",
    "read_document",
    "root_sensitivity",
    "serialize_machine_spec",
    "serialize_raw_equation",
    "serialize_report",
    "solve_root",
    "sweep",
    "validate_spec",
    "what_if",
]
