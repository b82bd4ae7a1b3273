import random
from pathlib import Path

import pytest

from compcap import (
    CharacteristicEquation,
    CoreGroup,
    CoreSpec,
    InstructionClassSpec,
    MachineSpec,
    MemoryHierarchySpec,
    MemoryLevelSpec,
    OperandSpec,
    RegisterFileSpec,
    Term,
    build_equation,
    canonicalize,
    parse_machine_spec,
    parse_raw_equation,
)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture(scope="session")
def toy_machine() -> MachineSpec:
    return parse_machine_spec((FIXTURES / "toy.json").read_text())


@pytest.fixture(scope="session")
def toy_core(toy_machine) -> CoreSpec:
    return toy_machine.core_groups[0].core


@pytest.fixture(scope="session")
def toy_equation(toy_core) -> CharacteristicEquation:
    return build_equation(toy_core)


@pytest.fixture(scope="session")
def m3_equation() -> CharacteristicEquation:
    return parse_raw_equation((FIXTURES / "cortex_m3.json").read_text())


@pytest.fixture(scope="session")
def a57_equation() -> CharacteristicEquation:
    return parse_raw_equation((FIXTURES / "cortex_a57.json").read_text())


@pytest.fixture(scope="session")
def golden_equation() -> CharacteristicEquation:
    # 1/x + 1/x**2 = 1 has the golden ratio as its root
    return canonicalize([Term(1, 1), Term(1, 2)])


def random_equation(rng: random.Random, max_terms: int = 6, max_exponent: int = 5,
                    max_coefficient: int = 20) -> CharacteristicEquation:
    """Small random canonical equation with sum of coefficients >= 2."""
    n_terms = rng.randint(1, max_terms)
    exponents = rng.sample(range(1, max_exponent + 1), min(n_terms, max_exponent))
    terms = [Term(rng.randint(1, max_coefficient), e) for e in exponents]
    if sum(t.coefficient for t in terms) < 2:
        terms[0] = Term(2, terms[0].exponent)
    return canonicalize(terms)


def equation_core(eq: CharacteristicEquation) -> CoreSpec:
    """A core whose characteristic equation is exactly eq: one
    instruction per term with a single immediate operand of domain equal
    to the coefficient."""
    instructions = tuple(
        InstructionClassSpec(
            mnemonic=f"op{i}",
            operands=(OperandSpec.immediate(term.coefficient),) if term.coefficient > 1 else (),
            execute_cycles=term.exponent,
        )
        for i, term in enumerate(eq.terms)
    )
    return CoreSpec(
        register_files=(RegisterFileSpec(name="r", count=1),),
        memory=MemoryHierarchySpec(levels=(MemoryLevelSpec(name="m", cells=1, access_cycles=1),)),
        instructions=instructions,
    )


def machine_of(core: CoreSpec, count: int = 1, name: str = "test") -> MachineSpec:
    return MachineSpec(name=name, core_groups=(CoreGroup(core=core, count=count),))
