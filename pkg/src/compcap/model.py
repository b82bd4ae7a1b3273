"""
Declarative architecture descriptions.

A machine is a set of core groups; a core is register files, a memory
hierarchy (fastest level first), instruction classes and a thread count.
These types carry no behaviour beyond validation: all invariants are
checked by validate_spec, which reports problems as data instead of
raising, so that partially-broken descriptions can still be inspected.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class RegisterFileSpec:
    """A named bank of addressable registers."""

    name: str
    count: int
    """Number of addressable registers; each register operand of an
    instruction enumerates this many variants."""


@dataclass(frozen=True)
class MemoryLevelSpec:
    """One level of the memory hierarchy."""

    name: str
    cells: int
    """Addressable memory cells at this level."""
    access_cycles: int
    """Clock cycles added when a lookup reaches this level. Levels are
    probed in order, so the effective latency of a level is the sum of
    access_cycles of itself and every faster level."""


@dataclass(frozen=True)
class MemoryHierarchySpec:
    """Ordered memory levels, fastest first. Order is authoritative:
    expansion accumulates access times in list order."""

    levels: tuple[MemoryLevelSpec, ...]

    def cumulative_access_cycles(self) -> tuple[int, ...]:
        """Latency down to each level (inclusive), in level order."""
        out = []
        total = 0
        for level in self.levels:
            total += level.access_cycles
            out.append(total)
        return tuple(out)


@dataclass(frozen=True)
class OperandSpec:
    """One operand position of an instruction class.

    kind is "register" (addresses a named register file), "memory"
    (addresses a cell anywhere in the hierarchy) or "immediate" (a
    literal drawn from a domain of the given size).
    """

    kind: str
    file: str | None = None
    domain: int | None = None

    @classmethod
    def register(cls, file: str) -> "OperandSpec":
        return cls(kind="register", file=file)

    @classmethod
    def memory(cls) -> "OperandSpec":
        return cls(kind="memory")

    @classmethod
    def immediate(cls, domain: int) -> "OperandSpec":
        return cls(kind="immediate", domain=domain)


@dataclass(frozen=True)
class InstructionClassSpec:
    """An instruction name plus its operand shape and execution time.

    execute_cycles excludes memory access time; memory operands add
    their level latency during expansion. Mnemonics need not be unique:
    e.g. "mov" may appear once with two register operands and once with
    a register and a memory operand.
    """

    mnemonic: str
    operands: tuple[OperandSpec, ...]
    execute_cycles: int


@dataclass(frozen=True)
class CoreSpec:
    """One computational core.

    threads is the number of independent instruction sequences the
    pipeline can run at once; when stage_throughputs is given it must
    equal the minimum stage throughput (see derive_thread_count).
    """

    register_files: tuple[RegisterFileSpec, ...]
    memory: MemoryHierarchySpec
    instructions: tuple[InstructionClassSpec, ...]
    threads: int = 1
    stage_throughputs: tuple[int, ...] | None = None


@dataclass(frozen=True)
class CoreGroup:
    """count identical cores sharing one CoreSpec."""

    core: CoreSpec
    count: int


@dataclass(frozen=True)
class MachineSpec:
    """A named machine: one or more core groups, optionally a clock rate
    for bits/second conversion."""

    name: str
    core_groups: tuple[CoreGroup, ...]
    clock_ghz: float | None = None


@dataclass(frozen=True)
class ValidationReport:
    """Validation outcome; errors are invariant violations, warnings are
    legal but suspicious."""

    errors: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def derive_thread_count(stage_throughputs: list[int] | tuple[int, ...]) -> int:
    """Thread count implied by a pipeline: the minimum stage throughput
    (no more instructions can run in parallel than the narrowest stage
    admits)."""
    if not stage_throughputs:
        raise ValueError("no pipeline stages given")
    return min(stage_throughputs)


def _validate_core(core: CoreSpec, where: str, errors: list[str], warnings: list[str]) -> None:
    file_names = set()
    for rf in core.register_files:
        if rf.count < 1:
            errors.append(f"{where}: register file '{rf.name}' must have count >= 1")
        if rf.name in file_names:
            errors.append(f"{where}: duplicate register file name '{rf.name}'")
        file_names.add(rf.name)

    if not core.memory.levels:
        errors.append(f"{where}: memory hierarchy is empty")
    level_names = set()
    for level in core.memory.levels:
        if level.cells < 1:
            errors.append(f"{where}: memory level '{level.name}' must have cells >= 1")
        if level.access_cycles < 1:
            errors.append(f"{where}: memory level '{level.name}' must have access_cycles >= 1")
        if level.name in level_names:
            errors.append(f"{where}: duplicate memory level name '{level.name}'")
        level_names.add(level.name)

    touches_memory = False
    for i, instr in enumerate(core.instructions):
        at = f"{where}.instructions[{i}] ('{instr.mnemonic}')"
        if instr.execute_cycles < 1:
            errors.append(f"{at}: execute_cycles must be >= 1")
        for j, op in enumerate(instr.operands):
            if op.kind == "register":
                if op.file is None or op.file not in file_names:
                    errors.append(f"{at}: operand {j} references unknown register file '{op.file}'")
            elif op.kind == "memory":
                touches_memory = True
            elif op.kind == "immediate":
                if op.domain is None or op.domain < 1:
                    errors.append(f"{at}: operand {j} immediate domain must be >= 1")
            else:
                errors.append(f"{at}: operand {j} has unknown kind '{op.kind}'")

    if not core.instructions:
        warnings.append(f"{where}: no instruction classes (characteristic equation will be empty)")
    elif not touches_memory:
        warnings.append(f"{where}: no instruction class touches memory")

    if core.threads < 1:
        errors.append(f"{where}: threads must be >= 1")
    if core.stage_throughputs is not None:
        if not core.stage_throughputs:
            errors.append(f"{where}: stage_throughputs must be non-empty when given")
        else:
            if any(s < 1 for s in core.stage_throughputs):
                errors.append(f"{where}: stage throughputs must be >= 1")
            elif core.threads != min(core.stage_throughputs):
                errors.append(
                    f"{where}: threads ({core.threads}) must equal the minimum stage "
                    f"throughput ({min(core.stage_throughputs)})"
                )


def validate_spec(spec: MachineSpec) -> ValidationReport:
    """Check every machine invariant; pure, deterministic.

    The error list is empty exactly when the spec satisfies all
    invariants. Warnings flag legal but suspicious inputs.
    """
    errors: list[str] = []
    warnings: list[str] = []

    if not spec.name:
        errors.append("machine: name must be non-empty")
    if not spec.core_groups:
        errors.append("machine: at least one core group is required")
    if spec.clock_ghz is not None and spec.clock_ghz <= 0:
        errors.append("machine: clock_ghz must be positive")

    for i, group in enumerate(spec.core_groups):
        where = f"cores[{i}]"
        if group.count < 1:
            errors.append(f"{where}: count must be >= 1")
        _validate_core(group.core, where, errors, warnings)

    return ValidationReport(errors=tuple(errors), warnings=tuple(warnings))
