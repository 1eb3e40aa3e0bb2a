"""
Classical approximation of theta = pi/8 programs.

Contains:
- the phase function f(a) = sum_p (-1)^{p·a} mod 16 and its discrete derivatives
- bias recovered from f by brute force over a
- the classical sampler Y = sum of rows not orthogonal to two random directions
- the exact bias of Y (rank of P_sᵀP_s) and its probability of being 0
- the linear-constraint attack and the bias-one implication checks
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .codes import quadratic_form_rank
from .config import IQPSettings, resolve_settings
from .errors import InfeasibleSizeError, ParameterError
from .gf2core import BitMatrix, BitVector, array_to_rows, batch_rank, kernel
from .simulator import SampleSet, exact_bias, signed_counts
from .xprogram import PI_OVER_8, ConstantActionProgram, submatrix_ps

logger = logging.getLogger(__name__)

MODULUS = 16
# Samples drawn per vectorised block.
SAMPLE_CHUNK = 4096
BIAS_ONE_TOLERANCE = 1e-12


def _check_vector(P: BitMatrix, v: BitVector, name: str) -> None:
    if v.length != P.n:
        raise ParameterError(f"{name} has length {v.length}, expected {P.n}")


# ============================================================================
# Phase function and derivatives
# ============================================================================

def f_eval(P: BitMatrix, a: BitVector) -> int:
    """f(a) = sum over rows of (-1)^{p·a}, reduced mod 16."""
    _check_vector(P, a, "a")
    return sum(1 - 2 * ((r & a.value).bit_count() & 1) for r in P.rows) % MODULUS


def f_derivative(P: BitMatrix, a: BitVector, d: BitVector) -> int:
    """f_d(a) = f(a) - f(a ⊕ d) mod 16."""
    _check_vector(P, d, "d")
    return (f_eval(P, a) - f_eval(P, a ^ d)) % MODULUS


def f_second_derivative(P: BitMatrix, a: BitVector, d: BitVector, e: BitVector) -> int:
    """f_{d,e}(a) = f_d(a) - f_d(a ⊕ e) mod 16, by double differencing."""
    _check_vector(P, e, "e")
    return (f_derivative(P, a, d) - f_derivative(P, a ^ e, d)) % MODULUS


def f_second_derivative_closed(P: BitMatrix, a: BitVector, d: BitVector, e: BitVector) -> int:
    """
    Closed form of f_{d,e}(a): 4·|P_d ∩ P_e| + 8·(Y·a) mod 16, where Y is
    the sum of the rows in P_d ∩ P_e. Linear in a up to the constant term.
    """
    for name, v in (("a", a), ("d", d), ("e", e)):
        _check_vector(P, v, name)
    shared = [r for r in P.rows if (r & d.value).bit_count() & 1 and (r & e.value).bit_count() & 1]
    y = 0
    for r in shared:
        y ^= r
    return (4 * len(shared) + 8 * ((y & a.value).bit_count() & 1)) % MODULUS


def bias_from_f(P: BitMatrix, s: BitVector, settings: Optional[IQPSettings] = None) -> float:
    """
    P(X·sᵀ = 0) at theta = pi/8 as the mean over a of cos²((pi/16)·f_s(a)),
    equivalently (1 + mean cos((pi/8)·f_s(a))) / 2.
    """
    settings = resolve_settings(settings)
    _check_vector(P, s, "s")
    if P.n > settings.fourier_max_qubits:
        raise InfeasibleSizeError("n", P.n, settings.fourier_max_qubits)
    counts = signed_counts(P.n, P.rows)
    shifted = counts[np.arange(1 << P.n, dtype=np.int64) ^ s.value]
    f_s = np.mod(counts - shifted, MODULUS)
    return float(np.mean(np.cos(math.pi / 16 * f_s) ** 2))


# ============================================================================
# Classical sampler
# ============================================================================

def _shared_row_sums(P: BitMatrix, m: int, rng: np.random.Generator) -> List[int]:
    """m draws of the sum of rows p with p·d = p·e = 1 for fresh uniform d, e."""
    if m < 0:
        raise ParameterError("sample count must be non-negative")
    if m == 0:
        return []
    rows = P.to_array().astype(np.float64)
    out: List[int] = []
    remaining = m
    while remaining:
        size = min(SAMPLE_CHUNK, remaining)
        d = rng.integers(0, 2, size=(size, P.n), dtype=np.uint8).astype(np.float64)
        e = rng.integers(0, 2, size=(size, P.n), dtype=np.uint8).astype(np.float64)
        mask = (np.mod(d @ rows.T, 2) * np.mod(e @ rows.T, 2))
        y = np.mod(mask @ rows, 2).astype(np.uint8)
        out.extend(array_to_rows(y) if P.n else [0] * size)
        remaining -= size
    return out


def cheat_sample(P: BitMatrix, m: int, rng: np.random.Generator) -> SampleSet:
    """m samples of the classical variable Y; cost is linear in k·n per sample."""
    return SampleSet.from_values(P.n, _shared_row_sums(P, m, rng))


def classical_bias_exact(P: BitMatrix, s: BitVector) -> float:
    """P(Y·sᵀ = 0) = (1 + 2^-rank(P_sᵀ P_s)) / 2."""
    r = quadratic_form_rank(submatrix_ps(P, s))
    return 0.5 * (1.0 + 2.0 ** (-r))


def classical_zero_probability(P: BitMatrix, settings: Optional[IQPSettings] = None) -> float:
    """
    P(Y = 0) = mean over d of 2^-rank(P_dᵀ P_d), since Y = P_dᵀ P_d · e is
    uniform on that matrix's column space for each direction d.
    """
    settings = resolve_settings(settings)
    if P.n > settings.fourier_max_qubits:
        raise InfeasibleSizeError("n", P.n, settings.fourier_max_qubits)
    if P.n == 0:
        return 1.0
    rows = P.to_array().astype(np.int64)
    bit_index = np.arange(P.n, dtype=np.int64)
    total = 0.0
    for start in range(0, 1 << P.n, SAMPLE_CHUNK):
        d_values = np.arange(start, min(start + SAMPLE_CHUNK, 1 << P.n), dtype=np.int64)
        d = (d_values[:, None] >> bit_index[None, :]) & 1
        mask = np.mod(d @ rows.T, 2)
        weighted = mask[:, :, None] * rows[None, :, :]
        gram = np.mod(weighted.transpose(0, 2, 1) @ rows, 2)
        total += float(np.sum(np.exp2(-batch_rank(gram).astype(np.float64))))
    return total / (1 << P.n)


# ============================================================================
# Attack and implication checks
# ============================================================================

def attack_linear_system(P: BitMatrix, m: int, rng: np.random.Generator) -> BitMatrix:
    """m constraint rows Y with Y·sᵀ = 0 whenever the quantum bias in s is 1."""
    return BitMatrix(tuple(_shared_row_sums(P, m, rng)), P.n)


def recover_secret_candidates(constraints: BitMatrix) -> BitMatrix:
    """Basis (one vector per row) of {s : C·sᵀ = 0}."""
    return kernel(constraints.transpose())


def check_bias_implication(
    P: BitMatrix,
    s: BitVector,
    settings: Optional[IQPSettings] = None,
) -> Tuple[bool, bool]:
    """
    (quantum bias is 1, classical bias is 1) for the pi/8 program P in
    direction s. The first implies the second.
    """
    quantum = exact_bias(ConstantActionProgram(P, PI_OVER_8), s, settings)
    classical = classical_bias_exact(P, s)
    return quantum >= 1.0 - BIAS_ONE_TOLERANCE, classical >= 1.0 - BIAS_ONE_TOLERANCE


@dataclass
class ImplicationSweep:
    """Outcome of the exhaustive bias-one implication sweep."""
    cases: int = 0
    violations: List[Tuple[BitMatrix, BitVector]] = field(default_factory=list)
    converse_examples: List[Tuple[BitMatrix, BitVector]] = field(default_factory=list)


def sweep_bias_implication(max_rows: int = 6, n: int = 4, keep_examples: int = 5) -> ImplicationSweep:
    """
    Check the bias-one implication on every direction s and every multiset
    of at most `max_rows` rows not orthogonal to s.

    Rows orthogonal to s change neither bias, so this covers every program
    with at most `max_rows` rows on n qubits.
    """
    result = ImplicationSweep()
    for s_value in range(1, 1 << n):
        s = BitVector(s_value, n)
        candidates = [r for r in range(1, 1 << n) if (r & s_value).bit_count() & 1]
        for size in range(max_rows + 1):
            for chosen in itertools.combinations_with_replacement(candidates, size):
                P = BitMatrix(chosen, n)
                quantum_one, classical_one = check_bias_implication(P, s)
                result.cases += 1
                if quantum_one and not classical_one:
                    result.violations.append((P, s))
                elif classical_one and not quantum_one and len(result.converse_examples) < keep_examples:
                    result.converse_examples.append((P, s))
    logger.info(
        f"Implication sweep: {result.cases} cases, {len(result.violations)} violation(s), "
        f"{len(result.converse_examples)} converse example(s) kept"
    )
    return result
