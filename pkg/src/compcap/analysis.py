"""
Aggregation, what-if perturbations and machine comparisons.

Capacity is additive across cores and threads multiply it: threads are
modelled as extra cores sharing the same memory, so a core's capacity is
its single-thread capacity times the thread count, and a machine's is
the sum over its core groups. Perturbations edit either a machine spec
(structural edits) or a raw equation (coefficient edits) and report the
capacity change together with a first-order estimate derived from the
root sensitivity.
"""

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .equation import CharacteristicEquation, Term, build_equation, canonicalize
from .model import CoreSpec, InstructionClassSpec, MachineSpec, validate_spec
from .solver import DEFAULT_REL_TOL, CapacityResult, solve_root

PERTURBATION_KINDS = (
    "scale_register_file",
    "scale_memory_cells",
    "set_access_cycles",
    "set_execute_cycles",
    "add_instruction_class",
    "set_threads",
    "scale_term_coefficient",
)


@dataclass(frozen=True)
class Perturbation:
    """A single structural or raw-equation edit.

    Only the fields relevant to the kind are set; use the classmethod
    constructors. scale_term_coefficient applies to raw equations only,
    the rest to machine specs only.
    """

    kind: str
    file: str | None = None
    level: str | None = None
    mnemonic: str | None = None
    factor: float | None = None
    cycles: int | None = None
    threads: int | None = None
    exponent: int | None = None
    instruction: InstructionClassSpec | None = None

    @classmethod
    def scale_register_file(cls, file: str, factor: float) -> "Perturbation":
        return cls(kind="scale_register_file", file=file, factor=factor)

    @classmethod
    def scale_memory_cells(cls, level: str, factor: float) -> "Perturbation":
        return cls(kind="scale_memory_cells", level=level, factor=factor)

    @classmethod
    def set_access_cycles(cls, level: str, cycles: int) -> "Perturbation":
        return cls(kind="set_access_cycles", level=level, cycles=cycles)

    @classmethod
    def set_execute_cycles(cls, mnemonic: str, cycles: int) -> "Perturbation":
        return cls(kind="set_execute_cycles", mnemonic=mnemonic, cycles=cycles)

    @classmethod
    def add_instruction_class(cls, instruction: InstructionClassSpec) -> "Perturbation":
        return cls(kind="add_instruction_class", instruction=instruction)

    @classmethod
    def set_threads(cls, threads: int) -> "Perturbation":
        return cls(kind="set_threads", threads=threads)

    @classmethod
    def scale_term_coefficient(cls, exponent: int, factor: float) -> "Perturbation":
        return cls(kind="scale_term_coefficient", exponent=exponent, factor=factor)


@dataclass(frozen=True)
class WhatIfReport:
    """Capacity change from one perturbation, with the first-order
    prediction from the root sensitivity at the baseline."""

    baseline_capacity: float
    perturbed_capacity: float
    delta: float
    relative_change: float
    first_order_estimate: float


@dataclass(frozen=True)
class ComparisonEntry:
    name: str
    capacity: float
    relative: float


@dataclass(frozen=True)
class ComparisonReport:
    """Capacities relative to a baseline; regressions list adjacent
    lineage pairs where the successor lost capacity (dead-end
    candidates)."""

    baseline: str
    entries: tuple[ComparisonEntry, ...]
    regressions: tuple[tuple[str, str], ...]


def core_capacity(core: CoreSpec, rel_tol: float = DEFAULT_REL_TOL) -> CapacityResult:
    """Solve the core's equation and multiply by its thread count.

    Threads share memory but otherwise behave like extra cores, so they
    scale capacity linearly. The unmultiplied value stays available as
    single_thread_capacity.
    """
    result = solve_root(build_equation(core), rel_tol)
    if core.threads == 1:
        return result
    return replace(
        result,
        capacity_bits_per_clock=result.capacity_bits_per_clock * core.threads,
        threads=core.threads,
    )


def equation_capacity(
    eq: CharacteristicEquation, threads: int = 1, rel_tol: float = DEFAULT_REL_TOL
) -> CapacityResult:
    """Capacity of a raw equation, with the same thread scaling as
    core_capacity."""
    result = solve_root(eq, rel_tol)
    if threads == 1:
        return result
    return replace(
        result,
        capacity_bits_per_clock=result.capacity_bits_per_clock * threads,
        threads=threads,
    )


def machine_capacity(spec: MachineSpec, rel_tol: float = DEFAULT_REL_TOL) -> CapacityResult:
    """Total machine capacity: sum over core groups of count x core
    capacity.

    Solver diagnostics (root, bracket, iterations, residual) describe
    the first core group's solve; for the common single-group machine
    that is the whole story. bits_per_second is filled when the spec
    carries a clock rate.
    """
    report = validate_spec(spec)
    if report.errors:
        raise ValueError("invalid machine spec: " + "; ".join(report.errors))
    group_results = [core_capacity(group.core, rel_tol) for group in spec.core_groups]
    total = 0.0
    for group, result in zip(spec.core_groups, group_results):
        total += group.count * result.capacity_bits_per_clock
    first = group_results[0]
    return replace(
        first,
        capacity_bits_per_clock=total,
        cores=sum(group.count for group in spec.core_groups),
        bits_per_second=total * spec.clock_ghz * 1e9 if spec.clock_ghz else None,
    )


def _scale_positive_int(value: int, factor: float) -> int:
    # Round to nearest (half up), never below 1. Fraction keeps huge
    # coefficients exact under integral factors.
    scaled = value * Fraction(factor)
    return max(1, int(scaled + Fraction(1, 2)))


def _perturb_core(core: CoreSpec, p: Perturbation) -> tuple[CoreSpec, bool]:
    """Apply a structural perturbation to one core; returns the new core
    and whether the target was found there."""
    if p.kind == "scale_register_file":
        files = tuple(
            replace(rf, count=_scale_positive_int(rf.count, p.factor)) if rf.name == p.file else rf
            for rf in core.register_files
        )
        hit = any(rf.name == p.file for rf in core.register_files)
        return replace(core, register_files=files), hit
    if p.kind == "scale_memory_cells":
        levels = tuple(
            replace(lv, cells=_scale_positive_int(lv.cells, p.factor)) if lv.name == p.level else lv
            for lv in core.memory.levels
        )
        hit = any(lv.name == p.level for lv in core.memory.levels)
        return replace(core, memory=replace(core.memory, levels=levels)), hit
    if p.kind == "set_access_cycles":
        levels = tuple(
            replace(lv, access_cycles=p.cycles) if lv.name == p.level else lv
            for lv in core.memory.levels
        )
        hit = any(lv.name == p.level for lv in core.memory.levels)
        return replace(core, memory=replace(core.memory, levels=levels)), hit
    if p.kind == "set_execute_cycles":
        # Applies to every class carrying the mnemonic; mnemonics need
        # not be unique.
        instrs = tuple(
            replace(ins, execute_cycles=p.cycles) if ins.mnemonic == p.mnemonic else ins
            for ins in core.instructions
        )
        hit = any(ins.mnemonic == p.mnemonic for ins in core.instructions)
        return replace(core, instructions=instrs), hit
    if p.kind == "add_instruction_class":
        return replace(core, instructions=core.instructions + (p.instruction,)), True
    if p.kind == "set_threads":
        # The hypothetical pipeline has a different width, so any
        # declared stage throughputs no longer apply.
        return replace(core, threads=p.threads, stage_throughputs=None), True
    raise ValueError(f"perturbation kind '{p.kind}' does not apply to machine specs")


def _perturb_equation(eq: CharacteristicEquation, p: Perturbation) -> CharacteristicEquation:
    if p.kind != "scale_term_coefficient":
        raise ValueError(
            f"perturbation kind '{p.kind}' does not apply to raw equations; "
            "only coefficients and exponents are recoverable from a bare equation"
        )
    if not any(term.exponent == p.exponent for term in eq.terms):
        raise ValueError(f"no term with exponent {p.exponent}")
    terms = [
        Term(_scale_positive_int(term.coefficient, p.factor), term.exponent)
        if term.exponent == p.exponent
        else term
        for term in eq.terms
    ]
    return canonicalize(terms)


def apply_perturbation(
    target: MachineSpec | CharacteristicEquation, p: Perturbation
) -> MachineSpec | CharacteristicEquation:
    """Return an edited copy of the machine spec or raw equation; the
    original is untouched. Raises when the target identifier resolves
    nowhere."""
    if p.kind not in PERTURBATION_KINDS:
        raise ValueError(f"unknown perturbation kind '{p.kind}'")
    if isinstance(target, CharacteristicEquation):
        return _perturb_equation(target, p)
    hit_any = False
    groups = []
    for group in target.core_groups:
        core, hit = _perturb_core(group.core, p)
        hit_any = hit_any or hit
        groups.append(replace(group, core=core))
    if not hit_any:
        what = p.file or p.level or p.mnemonic
        raise ValueError(f"perturbation target '{what}' not found in machine '{target.name}'")
    return replace(target, core_groups=tuple(groups))


def _first_order_root_shift(base_eq: CharacteristicEquation, new_eq: CharacteristicEquation,
                            root: float) -> float:
    """First-order change of the root for a coefficient-level diff
    between two equations, evaluated at the baseline root."""
    ln_x = math.log(root)
    denominator = 0.0
    for term in base_eq.terms:
        denominator += math.exp(
            math.log(term.coefficient) + math.log(term.exponent) - (term.exponent + 1) * ln_x
        )
    base_coeffs = {term.exponent: term.coefficient for term in base_eq.terms}
    new_coeffs = {term.exponent: term.coefficient for term in new_eq.terms}
    shift = 0.0
    for exponent in sorted(set(base_coeffs) | set(new_coeffs)):
        delta_c = new_coeffs.get(exponent, 0) - base_coeffs.get(exponent, 0)
        if delta_c:
            shift += float(delta_c) * math.exp(-exponent * ln_x)
    return shift / denominator


def _first_order_bits(base_eq: CharacteristicEquation, new_eq: CharacteristicEquation,
                      rel_tol: float) -> tuple[float, float]:
    """(baseline single-thread capacity, first-order capacity delta in
    bits) for one equation edit; ln(x + dx) - ln(x) ~ dx/x scaled to
    log2."""
    result = solve_root(base_eq, rel_tol)
    shift = _first_order_root_shift(base_eq, new_eq, result.root)
    return result.capacity_bits_per_clock, (shift / result.root) / math.log(2)


def what_if(
    target: MachineSpec | CharacteristicEquation,
    p: Perturbation,
    rel_tol: float = DEFAULT_REL_TOL,
) -> WhatIfReport:
    """Solve baseline and perturbed targets and report the change.

    The first-order estimate combines the per-equation root sensitivity
    with any thread-count change, so a pure set_threads edit is
    predicted exactly and a pure coefficient edit reduces to the
    sensitivity formula.
    """
    perturbed = apply_perturbation(target, p)
    if isinstance(target, CharacteristicEquation):
        baseline_capacity = solve_root(target, rel_tol).capacity_bits_per_clock
        perturbed_capacity = solve_root(perturbed, rel_tol).capacity_bits_per_clock
        _, estimate = _first_order_bits(target, perturbed, rel_tol)
    else:
        baseline_capacity = machine_capacity(target, rel_tol).capacity_bits_per_clock
        perturbed_capacity = machine_capacity(perturbed, rel_tol).capacity_bits_per_clock
        estimate = 0.0
        for base_group, new_group in zip(target.core_groups, perturbed.core_groups):
            base_eq = build_equation(base_group.core)
            new_eq = build_equation(new_group.core)
            single, bits = _first_order_bits(base_eq, new_eq, rel_tol)
            k_base = base_group.core.threads
            k_new = new_group.core.threads
            estimate += base_group.count * (k_new * (single + bits) - k_base * single)
    delta = perturbed_capacity - baseline_capacity
    if baseline_capacity:
        relative = delta / baseline_capacity
    else:
        relative = math.inf if delta > 0 else 0.0
    return WhatIfReport(
        baseline_capacity=baseline_capacity,
        perturbed_capacity=perturbed_capacity,
        delta=delta,
        relative_change=relative,
        first_order_estimate=estimate,
    )


def _with_value(family: Perturbation, value: float) -> Perturbation:
    """Fill a sweep family's varying knob with one value."""
    def as_int(v: float, what: str) -> int:
        if float(v) != int(v):
            raise ValueError(f"{what} must be an integer, got {v}")
        return int(v)

    kind = family.kind
    if kind in ("scale_register_file", "scale_memory_cells", "scale_term_coefficient"):
        return replace(family, factor=float(value))
    if kind in ("set_access_cycles", "set_execute_cycles"):
        return replace(family, cycles=as_int(value, "cycles"))
    if kind == "set_threads":
        return replace(family, threads=as_int(value, "threads"))
    if kind == "add_instruction_class":
        if family.instruction is None:
            raise ValueError("add_instruction_class sweep needs a template instruction")
        instr = replace(family.instruction, execute_cycles=as_int(value, "execute_cycles"))
        return replace(family, instruction=instr)
    raise ValueError(f"unknown perturbation kind '{kind}'")


def sweep(
    target: MachineSpec | CharacteristicEquation,
    family: Perturbation,
    values: list[float] | tuple[float, ...],
    rel_tol: float = DEFAULT_REL_TOL,
) -> list[tuple[float, float]]:
    """One what_if per value, in the given order; returns (value,
    perturbed capacity) pairs."""
    if not values:
        raise ValueError("sweep needs at least one value")
    points = []
    for value in values:
        report = what_if(target, _with_value(family, value), rel_tol)
        points.append((value, report.perturbed_capacity))
    return points


def compare(
    results: list[tuple[str, float]] | tuple[tuple[str, float], ...],
    baseline: str,
    lineage: list[str] | tuple[str, ...] | None = None,
) -> ComparisonReport:
    """Relate capacities to a baseline and flag lineage regressions.

    Each adjacent lineage pair whose successor has lower capacity than
    its predecessor is flagged as a dead-end candidate. Lineage is never
    inferred; the caller supplies the ordering.
    """
    capacities = dict(results)
    if baseline not in capacities:
        raise ValueError(f"baseline '{baseline}' not among results")
    base = capacities[baseline]
    entries = tuple(
        ComparisonEntry(name=name, capacity=cap, relative=cap / base) for name, cap in results
    )
    regressions: list[tuple[str, str]] = []
    if lineage:
        for name in lineage:
            if name not in capacities:
                raise ValueError(f"lineage name '{name}' not among results")
        for predecessor, successor in zip(lineage, lineage[1:]):
            if capacities[successor] < capacities[predecessor]:
                regressions.append((predecessor, successor))
    return ComparisonReport(baseline=baseline, entries=entries, regressions=tuple(regressions))
