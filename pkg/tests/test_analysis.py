"""Aggregation, perturbations, sweeps and comparisons."""

import dataclasses
import math
import random

import pytest

from compcap import (
    CoreGroup,
    InstructionClassSpec,
    MachineSpec,
    OperandSpec,
    Perturbation,
    Term,
    apply_perturbation,
    build_equation,
    canonicalize,
    compare,
    core_capacity,
    equation_capacity,
    machine_capacity,
    solve_root,
    sweep,
    what_if,
)
from conftest import equation_core, machine_of, random_equation


def test_core_capacity_single_thread(toy_core):
    result = core_capacity(toy_core)
    assert result.capacity_bits_per_clock == pytest.approx(6.06, abs=0.01)
    assert result.threads == 1


def test_threads_multiply_capacity(toy_core):
    doubled = dataclasses.replace(toy_core, threads=2)
    result = core_capacity(doubled)
    assert result.capacity_bits_per_clock == pytest.approx(12.12, abs=0.02)
    assert result.threads == 2
    assert result.single_thread_capacity == pytest.approx(6.06, abs=0.01)
    # multiplication is applied after solving the shared-memory equation
    assert result.root == core_capacity(toy_core).root


def test_a57_with_three_threads(a57_equation):
    result = equation_capacity(a57_equation, threads=3)
    assert result.capacity_bits_per_clock == pytest.approx(3 * 29.79, rel=0.015)
    assert result.single_thread_capacity == pytest.approx(29.79, rel=0.005)


def test_four_identical_cores(toy_core):
    machine = machine_of(toy_core, count=4)
    result = machine_capacity(machine)
    assert result.capacity_bits_per_clock == pytest.approx(24.24, abs=0.04)
    assert result.cores == 4


def test_single_core_group_equals_core_capacity(toy_core):
    assert (
        machine_capacity(machine_of(toy_core, count=1)).capacity_bits_per_clock
        == core_capacity(toy_core).capacity_bits_per_clock
    )


def test_heterogeneous_machine_adds_capacities():
    core_a = equation_core(canonicalize([Term(2, 1)]))          # capacity 1
    core_b = equation_core(canonicalize([Term(1, 1), Term(1, 2)]))  # golden ratio
    machine = MachineSpec(
        name="hetero",
        core_groups=(CoreGroup(core=core_a, count=2), CoreGroup(core=core_b, count=3)),
    )
    expected = 2 * core_capacity(core_a).capacity_bits_per_clock + \
        3 * core_capacity(core_b).capacity_bits_per_clock
    assert machine_capacity(machine).capacity_bits_per_clock == pytest.approx(expected, rel=1e-12)
    assert machine_capacity(machine).cores == 5


def test_concatenating_core_groups_adds_capacities():
    rng = random.Random(11)
    for _ in range(20):
        groups_a = tuple(
            CoreGroup(core=equation_core(random_equation(rng)), count=rng.randint(1, 4))
            for _ in range(rng.randint(1, 2))
        )
        groups_b = tuple(
            CoreGroup(core=equation_core(random_equation(rng)), count=rng.randint(1, 4))
            for _ in range(rng.randint(1, 2))
        )
        cap_a = machine_capacity(MachineSpec(name="a", core_groups=groups_a)).capacity_bits_per_clock
        cap_b = machine_capacity(MachineSpec(name="b", core_groups=groups_b)).capacity_bits_per_clock
        combined = machine_capacity(
            MachineSpec(name="ab", core_groups=groups_a + groups_b)
        ).capacity_bits_per_clock
        assert combined == pytest.approx(cap_a + cap_b, rel=1e-12)


def test_bits_per_second_conversion(toy_core):
    machine = MachineSpec(
        name="clocked", core_groups=(CoreGroup(core=toy_core, count=1),), clock_ghz=3.0
    )
    result = machine_capacity(machine)
    assert result.bits_per_second == pytest.approx(result.capacity_bits_per_clock * 3.0e9)


def test_machine_capacity_rejects_invalid_spec(toy_machine):
    broken = dataclasses.replace(toy_machine, core_groups=())
    with pytest.raises(ValueError, match="invalid machine spec"):
        machine_capacity(broken)


# ---------------------------------------------------------------- perturbations


def test_scale_register_file(toy_machine):
    grown = apply_perturbation(toy_machine, Perturbation.scale_register_file("r", 2))
    core = grown.core_groups[0].core
    assert core.register_files[0].count == 16
    assert Term(256, 1) in build_equation(core).terms
    # original untouched
    assert toy_machine.core_groups[0].core.register_files[0].count == 8


def test_fractional_scaling_rounds_to_nearest_min_one(toy_machine):
    up = apply_perturbation(toy_machine, Perturbation.scale_register_file("r", 1.5))
    assert up.core_groups[0].core.register_files[0].count == 12
    down = apply_perturbation(toy_machine, Perturbation.scale_register_file("r", 0.01))
    assert down.core_groups[0].core.register_files[0].count == 1


def test_set_access_cycles_shifts_exponents(toy_machine):
    faster = apply_perturbation(toy_machine, Perturbation.set_access_cycles("RAM", 3))
    eq = build_equation(faster.core_groups[0].core)
    # RAM latency 1+1+3=5 now coincides with mul's exponent: 64+2048
    assert eq.terms == (Term(64, 1), Term(192, 2), Term(2112, 5))


def test_scale_memory_cells(toy_machine):
    bigger = apply_perturbation(toy_machine, Perturbation.scale_memory_cells("cache", 4))
    core = bigger.core_groups[0].core
    assert core.memory.levels[0].cells == 64
    assert Term(64 * 8 + 64, 2) in build_equation(core).terms  # 8x64 cache + add's 64


def test_set_execute_cycles_applies_to_matching_mnemonics(toy_machine):
    slower = apply_perturbation(toy_machine, Perturbation.set_execute_cycles("mul", 6))
    core = slower.core_groups[0].core
    assert core.instructions[3].execute_cycles == 6
    # both "mov" classes share the mnemonic and move together
    moved = apply_perturbation(toy_machine, Perturbation.set_execute_cycles("mov", 2))
    assert [i.execute_cycles for i in moved.core_groups[0].core.instructions] == [2, 2, 2, 5]


def test_add_instruction_class(toy_machine):
    extra = InstructionClassSpec(
        mnemonic="fma", operands=(OperandSpec.immediate(2048),), execute_cycles=20
    )
    grown = apply_perturbation(toy_machine, Perturbation.add_instruction_class(extra))
    core = grown.core_groups[0].core
    assert core.instructions[-1] == extra
    assert Term(2048, 20) in build_equation(core).terms


def test_set_threads_clears_stage_throughputs(toy_machine):
    core = dataclasses.replace(
        toy_machine.core_groups[0].core, threads=2, stage_throughputs=(4, 2, 3)
    )
    machine = machine_of(core)
    rethreaded = apply_perturbation(machine, Perturbation.set_threads(4))
    assert rethreaded.core_groups[0].core.threads == 4
    assert rethreaded.core_groups[0].core.stage_throughputs is None


def test_unknown_targets_raise(toy_machine, toy_equation):
    with pytest.raises(ValueError, match="not found"):
        apply_perturbation(toy_machine, Perturbation.scale_register_file("xyz", 2))
    with pytest.raises(ValueError, match="not found"):
        apply_perturbation(toy_machine, Perturbation.set_access_cycles("L9", 1))
    with pytest.raises(ValueError, match="no term with exponent"):
        apply_perturbation(toy_equation, Perturbation.scale_term_coefficient(99, 2))


def test_mode_mismatch_raises(toy_machine, toy_equation):
    with pytest.raises(ValueError, match="does not apply"):
        apply_perturbation(toy_equation, Perturbation.scale_register_file("r", 2))
    with pytest.raises(ValueError, match="does not apply"):
        apply_perturbation(toy_machine, Perturbation.scale_term_coefficient(1, 2))


def test_scale_term_coefficient(toy_equation):
    scaled = apply_perturbation(toy_equation, Perturbation.scale_term_coefficient(1, 10))
    assert scaled.terms[0] == Term(640, 1)
    assert scaled.terms[1:] == toy_equation.terms[1:]


# --------------------------------------------------------------------- what-if


def test_what_if_register_scale_matches_re_expansion_oracle(toy_machine):
    report = what_if(toy_machine, Perturbation.scale_register_file("r", 2))
    # independent re-expansion: 16 registers
    oracle_eq = canonicalize([Term(256, 1), Term(256 + 256, 2), Term(256, 5), Term(4096, 7)])
    oracle = solve_root(oracle_eq).capacity_bits_per_clock
    assert report.perturbed_capacity == pytest.approx(oracle, rel=1e-12)
    assert report.delta == report.perturbed_capacity - report.baseline_capacity


def test_what_if_slow_instruction_is_negligible(toy_machine):
    extra = InstructionClassSpec(
        mnemonic="slow", operands=(OperandSpec.immediate(2048),), execute_cycles=20
    )
    report = what_if(toy_machine, Perturbation.add_instruction_class(extra))
    assert abs(report.relative_change) < 1e-3


def test_what_if_identity_perturbation_is_exactly_zero(toy_machine):
    report = what_if(toy_machine, Perturbation.scale_register_file("r", 1.0))
    assert report.delta == 0.0
    assert report.relative_change == 0.0
    assert report.first_order_estimate == 0.0
    same_cycles = what_if(toy_machine, Perturbation.set_access_cycles("RAM", 5))
    assert same_cycles.delta == 0.0


def test_what_if_on_raw_equation():
    eq = canonicalize([Term(2, 1)])
    report = what_if(eq, Perturbation.scale_term_coefficient(1, 2))
    assert report.baseline_capacity == pytest.approx(1.0, rel=1e-12)
    assert report.perturbed_capacity == pytest.approx(2.0, rel=1e-12)
    assert report.delta == pytest.approx(1.0, rel=1e-12)


def test_first_order_estimate_accuracy_for_small_changes():
    rng = random.Random(23)
    checked = 0
    for _ in range(40):
        base = random_equation(rng)
        # rescale coefficients so a 1% change stays integral
        eq = canonicalize([Term(t.coefficient * 1000, t.exponent) for t in base.terms])
        index = rng.randrange(len(eq.terms))
        report = what_if(eq, Perturbation.scale_term_coefficient(eq.terms[index].exponent, 1.01))
        if report.delta == 0.0:
            continue
        assert abs(report.delta - report.first_order_estimate) <= 0.1 * abs(report.delta)
        checked += 1
    assert checked >= 30


def test_first_order_estimate_is_exact_for_thread_changes(toy_core):
    machine = machine_of(toy_core)
    report = what_if(machine, Perturbation.set_threads(3))
    assert report.delta == pytest.approx(2 * report.baseline_capacity, rel=1e-12)
    assert report.first_order_estimate == pytest.approx(report.delta, rel=1e-12)


# ----------------------------------------------------------------------- sweep


def test_register_sweep_saturates(toy_machine):
    factors = [1, 2, 4, 8, 16]
    points = sweep(toy_machine, Perturbation(kind="scale_register_file", file="r"), factors)
    assert [v for v, _ in points] == factors
    capacities = [c for _, c in points]
    assert all(a < b for a, b in zip(capacities, capacities[1:]))
    # concavity in the factor: secant slopes strictly decrease
    slopes = [
        (capacities[i + 1] - capacities[i]) / (factors[i + 1] - factors[i])
        for i in range(len(factors) - 1)
    ]
    assert all(a > b for a, b in zip(slopes, slopes[1:]))


def test_slow_term_sweep_decays(toy_machine):
    template = InstructionClassSpec(
        mnemonic="slow", operands=(OperandSpec.immediate(2048),), execute_cycles=1
    )
    family = Perturbation(kind="add_instruction_class", instruction=template)
    base = machine_capacity(toy_machine, rel_tol=1e-18).capacity_bits_per_clock
    points = sweep(toy_machine, family, [3, 5, 10, 20], rel_tol=1e-18)
    deltas = [capacity - base for _, capacity in points]
    assert all(a > b for a, b in zip(deltas, deltas[1:]))
    assert all(d >= 0 for d in deltas)


def test_single_value_sweep_matches_what_if(toy_machine):
    p = Perturbation.scale_register_file("r", 2.0)
    points = sweep(toy_machine, Perturbation(kind="scale_register_file", file="r"), [2.0])
    assert points == [(2.0, what_if(toy_machine, p).perturbed_capacity)]


def test_sweep_rejects_empty_values(toy_machine):
    with pytest.raises(ValueError):
        sweep(toy_machine, Perturbation(kind="scale_register_file", file="r"), [])


def test_sweep_rejects_fractional_cycles(toy_machine):
    family = Perturbation(kind="set_access_cycles", level="RAM")
    with pytest.raises(ValueError, match="integer"):
        sweep(toy_machine, family, [2.5])


# --------------------------------------------------------------------- compare


def test_pentium_regression_flagged():
    report = compare(
        [("P3", 42.021), ("P4", 39.657)], baseline="P3", lineage=["P3", "P4"]
    )
    assert report.regressions == (("P3", "P4"),)
    p4 = next(e for e in report.entries if e.name == "P4")
    assert p4.relative == pytest.approx(0.9437, abs=1e-4)
    p3 = next(e for e in report.entries if e.name == "P3")
    assert p3.relative == 1.0
    # Eq. 3 arithmetic on the same published values
    assert 42.021 + 39.657 == pytest.approx(81.678, abs=1e-12)


def test_m3_to_a57_relative_increase(m3_equation, a57_equation):
    m3 = solve_root(m3_equation).capacity_bits_per_clock
    a57 = solve_root(a57_equation).capacity_bits_per_clock
    report = compare([("M3", m3), ("A57", a57)], baseline="M3", lineage=["M3", "A57"])
    a57_entry = next(e for e in report.entries if e.name == "A57")
    assert a57_entry.relative == pytest.approx(1.182, abs=0.01)
    assert report.regressions == ()


def test_single_entry_comparison():
    report = compare([("solo", 12.5)], baseline="solo")
    assert report.entries[0].relative == 1.0
    assert report.regressions == ()


def test_compare_requires_known_names():
    with pytest.raises(ValueError, match="baseline"):
        compare([("a", 1.0)], baseline="b")
    with pytest.raises(ValueError, match="lineage"):
        compare([("a", 1.0)], baseline="a", lineage=["a", "ghost"])


def test_compare_is_scale_invariant():
    results = [("a", 10.0), ("b", 7.5), ("c", 12.0)]
    scaled = [(n, c * math.pi) for n, c in results]
    base = compare(results, baseline="a", lineage=["a", "b", "c"])
    big = compare(scaled, baseline="a", lineage=["a", "b", "c"])
    assert big.regressions == base.regressions
    for e1, e2 in zip(base.entries, big.entries):
        assert e2.relative == pytest.approx(e1.relative, rel=1e-12)
