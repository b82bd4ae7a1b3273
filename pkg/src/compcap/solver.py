"""
Root solving and capacity computation.

The equation LHS sum(c * x**-e) is strictly decreasing on (0, inf), so
the root of LHS = 1 is unique. It is bracketed provably: at
lo = max(1, max(c**(1/e))) the LHS is >= 1, and at hi = sum(c) it is
<= 1 whenever every exponent is >= 1. Bisection on that bracket is the
reference method; per-term evaluation happens in log space so that
coefficients around 1e9 and roots around 1e7 with exponents up to ~17
neither overflow nor underflow.
"""

import math
from dataclasses import dataclass

from .equation import CharacteristicEquation, gcd_of_exponents

DEFAULT_REL_TOL = 1e-13

_MAX_ITERATIONS = 2000
_EXP_OVERFLOW = 700.0  # exp() argument beyond which a term is effectively infinite


@dataclass(frozen=True)
class CapacityResult:
    """Solved capacity plus solver diagnostics.

    root, bracket, iterations and residual always describe one solved
    equation. capacity_bits_per_clock is the reported (possibly
    aggregated) capacity: solve_root sets it to log2(root), while the
    analysis helpers multiply in thread and core counts and keep the
    unmultiplied value in single_thread_capacity.
    """

    root: float
    capacity_bits_per_clock: float
    iterations: int
    bracket: tuple[float, float]
    residual: float
    gcd_warning: int | None = None
    threads: int = 1
    cores: int = 1
    single_thread_capacity: float | None = None
    bits_per_second: float | None = None


def evaluate_lhs(eq: CharacteristicEquation, x: float) -> float:
    """Evaluate sum(c * x**-e) at x > 0, one exp/log per term."""
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    ln_x = math.log(x)
    total = 0.0
    for term in eq.terms:
        log_term = math.log(term.coefficient) - term.exponent * ln_x
        if log_term > _EXP_OVERFLOW:
            return math.inf
        total += math.exp(log_term)
    return total


def _bracket(eq: CharacteristicEquation) -> tuple[float, float]:
    lo = 1.0
    for term in eq.terms:
        if term.exponent == 1:
            bound = float(term.coefficient)
        else:
            bound = math.exp(math.log(term.coefficient) / term.exponent)
        lo = max(lo, bound)
    hi = max(lo, float(sum(term.coefficient for term in eq.terms)))
    return lo, hi


def solve_root(eq: CharacteristicEquation, rel_tol: float = DEFAULT_REL_TOL) -> CapacityResult:
    """Find the unique positive root of LHS = 1 by bisection.

    Stops when the bracket's relative width drops below rel_tol or the
    interval can no longer be split in floating point, so rel_tol may be
    set below machine epsilon to force full double-precision resolution.
    """
    if rel_tol <= 0:
        rel_tol = 0.0
    lo, hi = _bracket(eq)
    iterations = 0
    if hi <= lo or evaluate_lhs(eq, lo) <= 1.0:
        # Degenerate bracket, or lo already past the root to float
        # precision (single-term equations hit this exactly).
        root = lo
    else:
        a, b = lo, hi
        while (b - a) > rel_tol * b and iterations < _MAX_ITERATIONS:
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break  # interval no longer splittable
            if evaluate_lhs(eq, mid) >= 1.0:
                a = mid
            else:
                b = mid
            iterations += 1
        root = 0.5 * (a + b)
    gcd = gcd_of_exponents(eq)
    capacity = math.log2(root)
    return CapacityResult(
        root=root,
        capacity_bits_per_clock=capacity,
        iterations=iterations,
        bracket=(lo, hi),
        residual=abs(evaluate_lhs(eq, root) - 1.0),
        gcd_warning=gcd if gcd > 1 else None,
        single_thread_capacity=capacity,
    )


def capacity_from_root(root: float) -> float:
    """log2 of a dominant root; roots below 1 would mean negative
    capacity and are rejected as degenerate."""
    if root < 1:
        raise ValueError(f"root must be >= 1, got {root}")
    return math.log2(root)


def root_sensitivity(eq: CharacteristicEquation, term_index: int) -> float:
    """Derivative of the root with respect to one term's coefficient.

    Implicit differentiation of LHS(x, c) = 1 gives
    dx/dc_i = x**-e_i / sum(c_j * e_j * x**-(e_j + 1)).
    """
    if not 0 <= term_index < len(eq.terms):
        raise IndexError(f"term index {term_index} out of range for {len(eq.terms)} terms")
    root = solve_root(eq).root
    ln_x = math.log(root)
    numerator = math.exp(-eq.terms[term_index].exponent * ln_x)
    denominator = 0.0
    for term in eq.terms:
        denominator += math.exp(
            math.log(term.coefficient) + math.log(term.exponent) - (term.exponent + 1) * ln_x
        )
    return numerator / denominator


def enumerate_tasks(eq: CharacteristicEquation, t: int) -> int:
    """Exact count of instruction sequences with total time t.

    Dynamic programming over exact ints: N(0) = 1 and
    N(t) = sum(c_i * N(t - e_i)) over terms with e_i <= t. Counts grow
    as 2**(capacity * t), so fixed-width arithmetic is out of the
    question almost immediately.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    counts = [0] * (t + 1)
    counts[0] = 1
    for time in range(1, t + 1):
        total = 0
        for term in eq.terms:
            if term.exponent <= time:
                total += term.coefficient * counts[time - term.exponent]
        counts[time] = total
    return counts[t]


def int_log2(n: int) -> float:
    """log2 of a positive int of any size (math.log2 overflows past
    2**1024)."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    bits = n.bit_length()
    if bits <= 900:
        return math.log2(n)
    shift = bits - 64
    return math.log2(n >> shift) + shift
