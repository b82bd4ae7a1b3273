"""
Expansion of a core description into its characteristic equation.

Every instruction class contributes one term per combination of operand
values sharing the same total execution time: the coefficient counts the
variants, the exponent is the time in clock cycles. The characteristic
equation is sum(coefficient / X**exponent) = 1; its largest real root
determines the capacity (see solver).
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce

from .model import CoreSpec, InstructionClassSpec


@dataclass(frozen=True)
class Term:
    """coefficient / X**exponent. Coefficients are exact ints of
    arbitrary size; realistic operand products overflow 64 bits."""

    coefficient: int
    exponent: int


@dataclass(frozen=True)
class CharacteristicEquation:
    """Canonical equation: terms sorted by ascending exponent, one term
    per exponent, all coefficients >= 1.

    expansion, when present, preserves the pre-merge terms in instruction
    order for display fidelity; it never participates in equality.
    """

    terms: tuple[Term, ...]
    expansion: tuple[Term, ...] | None = field(default=None, compare=False, repr=False)


def canonicalize(
    terms: list[Term] | tuple[Term, ...],
    expansion: tuple[Term, ...] | None = None,
) -> CharacteristicEquation:
    """Merge terms with equal exponents and sort ascending.

    Idempotent and order-independent; rejects empty input and terms with
    coefficient < 1 or exponent < 1.
    """
    if not terms:
        raise ValueError("equation has no terms")
    merged: dict[int, int] = {}
    for term in terms:
        if term.coefficient < 1:
            raise ValueError(f"term coefficient must be >= 1, got {term.coefficient}")
        if term.exponent < 1:
            raise ValueError(f"term exponent must be >= 1, got {term.exponent}")
        merged[term.exponent] = merged.get(term.exponent, 0) + term.coefficient
    canonical = tuple(Term(merged[e], e) for e in sorted(merged))
    return CharacteristicEquation(terms=canonical, expansion=expansion)


def expand_instruction(instr: InstructionClassSpec, core: CoreSpec) -> list[Term]:
    """Expand one instruction class into equation terms.

    Register and immediate operands multiply the variant count. Each
    memory operand is resolved at every hierarchy level independently
    (Cartesian product for several memory operands): the chosen level
    contributes its cell count to the coefficient and its cumulative
    access latency to the exponent. An operand-free instruction yields a
    single term with coefficient 1.
    """
    file_sizes = {rf.name: rf.count for rf in core.register_files}
    base = 1
    memory_operands = 0
    for op in instr.operands:
        if op.kind == "register":
            size = file_sizes.get(op.file or "")
            if size is None:
                raise ValueError(
                    f"instruction '{instr.mnemonic}' references unknown register file '{op.file}'"
                )
            base *= size
        elif op.kind == "immediate":
            if op.domain is None or op.domain < 1:
                raise ValueError(
                    f"instruction '{instr.mnemonic}' has an immediate operand without a valid domain"
                )
            base *= op.domain
        elif op.kind == "memory":
            memory_operands += 1
        else:
            raise ValueError(f"unknown operand kind '{op.kind}'")

    levels = tuple(zip(
        (level.cells for level in core.memory.levels),
        core.memory.cumulative_access_cycles(),
    ))
    if memory_operands and not levels:
        raise ValueError(
            f"instruction '{instr.mnemonic}' has memory operands but the core has no memory levels"
        )

    terms = []
    for combo in itertools.product(levels, repeat=memory_operands):
        coefficient = base
        exponent = instr.execute_cycles
        for cells, latency in combo:
            coefficient *= cells
            exponent += latency
        terms.append(Term(coefficient, exponent))
    return terms


def expand_core(core: CoreSpec) -> list[Term]:
    """Pre-merge expansion of every instruction class, in list order."""
    terms: list[Term] = []
    for instr in core.instructions:
        terms.extend(expand_instruction(instr, core))
    return terms


def build_equation(core: CoreSpec) -> CharacteristicEquation:
    """Expand the core and canonicalize; the pre-merge expansion is kept
    on the result for display. Raises if the core has no instructions."""
    if not core.instructions:
        raise ValueError("core has no instruction classes; equation would be empty")
    expansion = tuple(expand_core(core))
    return canonicalize(expansion, expansion=expansion)


def gcd_of_exponents(eq: CharacteristicEquation) -> int:
    """gcd of all exponents. A value > 1 does not prevent solving but
    weakens the sequence-counting interpretation of the capacity, so it
    is surfaced downstream as a warning."""
    return reduce(math.gcd, (term.exponent for term in eq.terms))
