"""
Binary linear codes: quadratic residue codes and weight enumerators.

Contains:
- LinearCode / WeightDistribution value types
- Legendre indicator and quadratic residue code construction
- exhaustive weight enumeration (Gray-code blocks over packed words)
- weight enumerator evaluation, doubly-even / self-dual predicates
- rank of the quadratic form MᵀM
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import IQPSettings, resolve_settings
from .errors import InfeasibleSizeError, ParameterError
from .gf2core import (
    BitMatrix,
    BitVector,
    col_echelon_reduce,
    popcount_words,
    rank,
    rows_to_words,
)

logger = logging.getLogger(__name__)

# Codes up to this rank are enumerated directly on Python ints.
SMALL_RANK = 10
# Low-block size for the vectorised enumerator.
LOW_BLOCK_BITS = 16


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class LinearCode:
    """Code spanned by the columns of `generator`; codeword length = generator.k."""

    generator: BitMatrix
    rank: int

    @classmethod
    def from_generator(cls, generator: BitMatrix) -> "LinearCode":
        return cls(generator, rank(generator))

    @property
    def length(self) -> int:
        return self.generator.k

    def basis(self) -> List[int]:
        """Linearly independent codewords as packed ints (bit i = position i)."""
        R, _ = col_echelon_reduce(self.generator)
        return list(R.transpose().rows)

    def contains(self, word: BitVector) -> bool:
        if word.length != self.length:
            return False
        return rank(self.generator.append_column(word)) == self.rank


@dataclass(frozen=True)
class WeightDistribution:
    """counts[w] = number of codewords of Hamming weight w, for w = 0..length."""

    counts: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.counts) - 1

    @property
    def total(self) -> int:
        return sum(self.counts)

    def nonzero_weights(self) -> List[int]:
        return [w for w, c in enumerate(self.counts) if c]


# ============================================================================
# Quadratic residue codes
# ============================================================================

def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    return all(q % d for d in range(3, math.isqrt(q) + 1, 2))


def legendre_indicator(j: int, q: int) -> int:
    """1 iff j is a nonzero quadratic residue mod the odd prime q."""
    if q < 3 or not is_prime(q):
        raise ParameterError(f"q={q} is not an odd prime")
    if not 1 <= j <= q - 1:
        raise ParameterError(f"j={j} outside 1..{q - 1}")
    return 1 if pow(j, (q - 1) // 2, q) == 1 else 0


def validate_qr_prime(q: int) -> None:
    """Raise ParameterError unless q is prime with 8 | q+1."""
    if not is_prime(q) or (q + 1) % 8 != 0:
        raise ParameterError(f"q={q} must be a prime with q+1 divisible by 8")


def valid_qr_primes(limit: int) -> List[int]:
    """All admissible challenge parameters q <= limit."""
    return [q for q in range(7, limit + 1, 8) if is_prime(q)]


def qr_code(q: int) -> LinearCode:
    """
    Quadratic residue code of length q and rank (q+1)/2.

    All q cyclic rotations of the Legendre indicator word are stacked as
    columns and column-echelon reduced, giving a canonical basis.
    """
    validate_qr_prime(q)
    word = [0] + [legendre_indicator(j, q) for j in range(1, q)]
    # Row j, column r holds rotation r of the word at position j.
    rows = tuple(
        sum(word[(j - r) % q] << r for r in range(q)) for j in range(q)
    )
    R, _ = col_echelon_reduce(BitMatrix(rows, q))
    expected = (q + 1) // 2
    if R.n != expected:
        raise ParameterError(f"quadratic residue code for q={q} has rank {R.n}, expected {expected}")
    logger.debug(f"Built quadratic residue code q={q}, rank {R.n}")
    return LinearCode(R, R.n)


def qr_closed_form_biases(q: int) -> Tuple[float, float]:
    """
    Quantum and classical-sampler biases of any QR challenge at theta = pi/8.

    Returns:
        (cos²(pi/8), 3/4)
    """
    validate_qr_prime(q)
    return math.cos(math.pi / 8) ** 2, 0.75


def extend_with_parity(code: LinearCode) -> LinearCode:
    """Extended code: each codeword gets an overall parity bit appended."""
    G = code.generator
    parity_row = sum((G.column(j).weight() & 1) << j for j in range(G.n))
    return LinearCode(G.vstack(BitMatrix((parity_row,), G.n)), code.rank)


# ============================================================================
# Weight enumeration
# ============================================================================

def _small_distribution(basis: List[int], length: int) -> List[int]:
    counts = [0] * (length + 1)
    word = 0
    counts[0] += 1
    for i in range(1, 1 << len(basis)):
        word ^= basis[(i & -i).bit_length() - 1]
        counts[word.bit_count()] += 1
    return counts


def _block_counts(
    low_table: np.ndarray,
    high_words: np.ndarray,
    start: int,
    stop: int,
    length: int,
) -> np.ndarray:
    """Weight counts for high Gray-code indices start..stop-1."""
    counts = np.zeros(length + 1, dtype=np.int64)
    gray = start ^ (start >> 1)
    offset = np.zeros(low_table.shape[1], dtype=np.uint64)
    for b in range(high_words.shape[0]):
        if (gray >> b) & 1:
            offset ^= high_words[b]
    for i in range(start, stop):
        if i > start:
            offset ^= high_words[(i & -i).bit_length() - 1]
        weights = popcount_words(low_table ^ offset)
        counts += np.bincount(weights, minlength=length + 1)
    return counts


def weight_distribution(code: LinearCode, settings: Optional[IQPSettings] = None) -> WeightDistribution:
    """
    Exact weight distribution by exhaustive enumeration.

    Raises:
        InfeasibleSizeError: rank above the enumeration cap
    """
    settings = resolve_settings(settings)
    if code.rank > settings.enumeration_max_rank:
        raise InfeasibleSizeError("code rank", code.rank, settings.enumeration_max_rank,
                                  f"enumeration infeasible: rank {code.rank} exceeds cap "
                                  f"{settings.enumeration_max_rank}")
    basis = code.basis()
    length = code.length
    if code.rank <= SMALL_RANK:
        return WeightDistribution(tuple(_small_distribution(basis, length)))

    words = rows_to_words(basis, length)
    low_bits = min(code.rank, LOW_BLOCK_BITS)
    low_table = np.zeros((1, words.shape[1]), dtype=np.uint64)
    for b in range(low_bits):
        low_table = np.concatenate([low_table, low_table ^ words[b]])
    high_words = words[low_bits:]
    n_high = 1 << high_words.shape[0]

    workers = max(1, min(settings.threads, n_high))
    bounds = [n_high * w // workers for w in range(workers + 1)]
    logger.debug(f"Enumerating 2^{code.rank} codewords with {workers} worker(s)")
    if workers == 1:
        counts = _block_counts(low_table, high_words, 0, n_high, length)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda w: _block_counts(low_table, high_words, bounds[w], bounds[w + 1], length),
                range(workers),
            ))
        counts = np.sum(parts, axis=0)
    return WeightDistribution(tuple(int(c) for c in counts))


def wep_eval(code: LinearCode, x: complex, y: complex, settings: Optional[IQPSettings] = None) -> complex:
    """Weight enumerator polynomial: sum over codewords of x^wt · y^(length-wt)."""
    dist = weight_distribution(code, settings)
    x, y = complex(x), complex(y)
    return sum(
        (count * x ** w * y ** (dist.length - w) for w, count in enumerate(dist.counts) if count),
        complex(0),
    )


def mod4_split(dist: WeightDistribution) -> Dict[int, int]:
    """Codeword counts grouped by weight mod 4."""
    split = {0: 0, 1: 0, 2: 0, 3: 0}
    for w, count in enumerate(dist.counts):
        split[w % 4] += count
    return split


# ============================================================================
# Predicates
# ============================================================================

def is_doubly_even(code: LinearCode) -> bool:
    """
    True iff every codeword weight is divisible by 4.

    A code is doubly even exactly when a basis is: each basis word has
    weight 0 mod 4 and all basis words pairwise overlap evenly.
    """
    basis = code.basis()
    if any(b.bit_count() % 4 for b in basis):
        return False
    return all((a & b).bit_count() % 2 == 0 for i, a in enumerate(basis) for b in basis[i + 1:])


def is_self_dual(code: LinearCode) -> bool:
    """True iff the code equals its dual: rank = length/2 and GᵀG = 0."""
    if code.length % 2 or code.rank * 2 != code.length:
        return False
    G = code.generator
    return all(row == 0 for row in G.transpose().matmul(G).rows)


def quadratic_form_rank(M: BitMatrix) -> int:
    """Rank over GF(2) of MᵀM."""
    return rank(M.transpose().matmul(M))
