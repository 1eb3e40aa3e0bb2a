"""
Exact simulation of X-programs.

Contains:
- OutputDistribution / SampleSet
- Walsh-Hadamard transform
- Fourier (2^n) and path-sum (2^k) distribution backends
- inverse-CDF sampling
- exact directional bias from the weight distribution of P_s
- collision entropy (direct and via all directional biases)
- binary and CSV distribution export
"""

import logging
import math
import struct
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from .codes import LinearCode, weight_distribution
from .config import IQPSettings, resolve_settings
from .errors import FormatError, InfeasibleSizeError, ParameterError
from .gf2core import BitVector
from .xprogram import Action, ConstantActionProgram, XProgram, as_xprogram, classify_special, submatrix_ps

logger = logging.getLogger(__name__)

BackendName = Literal["fourier", "pathsum"]
PathLike = Union[str, Path]


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True, eq=False)
class OutputDistribution:
    """Probability vector over F2^n; index x has bit j = component j."""

    n: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (1 << self.n,):
            raise ParameterError(f"expected {1 << self.n} probabilities, got shape {probs.shape}")
        if np.any(probs < -1e-12):
            raise ParameterError("probabilities must be non-negative")
        probs = np.clip(probs, 0.0, None)
        total = probs.sum()
        if total <= 0:
            raise ParameterError("probabilities sum to zero")
        probs = probs / total
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point_mass(cls, n: int, x: int) -> "OutputDistribution":
        probs = np.zeros(1 << n)
        probs[x] = 1.0
        return cls(n, probs)

    @classmethod
    def uniform(cls, n: int) -> "OutputDistribution":
        return cls(n, np.full(1 << n, 1.0 / (1 << n)))

    def probability(self, x: BitVector) -> float:
        if x.length != self.n:
            raise ParameterError(f"outcome has length {x.length}, expected {self.n}")
        return float(self.probs[x.value])

    def total_variation(self, other: "OutputDistribution") -> float:
        if other.n != self.n:
            raise ParameterError(f"width mismatch: {self.n} vs {other.n}")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())

    def sample_indices(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """m independent outcomes by inverse CDF (binary search per draw)."""
        if m < 0:
            raise ParameterError("sample count must be non-negative")
        cdf = np.cumsum(self.probs)
        draws = rng.random(m) * cdf[-1]
        idx = np.searchsorted(cdf, draws, side="right")
        return np.minimum(idx, (1 << self.n) - 1)


@dataclass(frozen=True)
class SampleSet:
    """Bitstring samples of common width n."""

    n: int
    samples: Tuple[BitVector, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        for i, x in enumerate(self.samples):
            if x.length != self.n:
                raise ParameterError(f"sample {i} has length {x.length}, expected {self.n}")

    @classmethod
    def from_values(cls, n: int, values: Sequence[int]) -> "SampleSet":
        return cls(n, tuple(BitVector(int(v), n) for v in values))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def fraction_orthogonal(self, s: BitVector) -> float:
        """Fraction of samples x with x·sᵀ = 0 (0.0 for an empty set)."""
        if not self.samples:
            return 0.0
        return sum(1 for x in self.samples if x.dot(s) == 0) / len(self.samples)

    def to_text(self) -> str:
        return "".join(f"{x.to_string()}\n" for x in self.samples)

    @classmethod
    def from_text(cls, text: str, n: int) -> "SampleSet":
        samples = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            if len(line) != n:
                raise FormatError(f"line {lineno}: sample has {len(line)} bits, expected {n}")
            samples.append(BitVector.from_string(line))
        return cls(n, tuple(samples))


# ============================================================================
# Walsh-Hadamard transform
# ============================================================================

def fwht(values: np.ndarray) -> np.ndarray:
    """
    Unnormalised Walsh-Hadamard transform: out[x] = sum_a (-1)^{x·a} values[a].

    Returns a new array; the input length must be a power of two.
    """
    a = np.array(values, copy=True)
    size = a.shape[0]
    if size & (size - 1):
        raise ParameterError(f"length {size} is not a power of two")
    h = 1
    while h < size:
        blocks = a.reshape(-1, 2, h)
        a = np.stack((blocks[:, 0] + blocks[:, 1], blocks[:, 0] - blocks[:, 1]), axis=1).reshape(-1)
        h *= 2
    return a


def parity_table(n: int, row: int) -> np.ndarray:
    """(-1)^{p·a} for every a in F2^n, as int64."""
    a = np.arange(1 << n, dtype=np.uint64)
    return 1 - 2 * (np.bitwise_count(a & np.uint64(row)) & 1).astype(np.int64)


def signed_counts(n: int, rows: Sequence[int]) -> np.ndarray:
    """c(a) = sum over rows of (-1)^{p·a}, exact integers."""
    total = np.zeros(1 << n, dtype=np.int64)
    for row in rows:
        total += parity_table(n, row)
    return total


# ============================================================================
# Backends
# ============================================================================

def _check_state_space(n: int, settings: IQPSettings) -> None:
    if n > settings.fourier_max_qubits:
        raise InfeasibleSizeError("n", n, settings.fourier_max_qubits,
                                  f"state space infeasible: n={n} exceeds cap {settings.fourier_max_qubits}")


def distribution_fourier(
    prog: Union[XProgram, ConstantActionProgram],
    settings: Optional[IQPSettings] = None,
    theta_offset: float = 0.0,
) -> OutputDistribution:
    """
    Exact distribution via amp(x) = 2^-n sum_a (-1)^{x·a} exp(i phase(a)).

    Elements are grouped by action so each group's signed count is an exact
    integer before it is scaled by its angle. `theta_offset` (radians) is
    added to every action.
    """
    settings = resolve_settings(settings)
    xprog = as_xprogram(prog)
    _check_state_space(xprog.n, settings)

    groups: Dict[Action, List[int]] = defaultdict(list)
    for theta, p in xprog.elements:
        groups[theta].append(p.value)
    phase = np.zeros(1 << xprog.n, dtype=np.float64)
    for theta, rows in groups.items():
        phase += (theta.radians + theta_offset) * signed_counts(xprog.n, rows)

    amplitudes = fwht(np.exp(1j * phase)) / (1 << xprog.n)
    logger.debug(f"Fourier backend: n={xprog.n}, k={xprog.k}, {len(groups)} action group(s)")
    return OutputDistribution(xprog.n, np.abs(amplitudes) ** 2)


def distribution_pathsum(
    prog: Union[XProgram, ConstantActionProgram],
    settings: Optional[IQPSettings] = None,
) -> OutputDistribution:
    """
    Exact distribution by summing cos/i·sin weights over all 2^k element
    subsets, each landing on the XOR of its rows.
    """
    settings = resolve_settings(settings)
    xprog = as_xprogram(prog)
    if xprog.k > settings.pathsum_max_rows:
        raise InfeasibleSizeError("k", xprog.k, settings.pathsum_max_rows)
    _check_state_space(xprog.n, settings)

    weights = np.ones(1, dtype=np.complex128)
    outcomes = np.zeros(1, dtype=np.int64)
    for theta, p in xprog.elements:
        angle = theta.radians
        weights = np.concatenate((weights * math.cos(angle), weights * (1j * math.sin(angle))))
        outcomes = np.concatenate((outcomes, outcomes ^ p.value))
    size = 1 << xprog.n
    amplitudes = (
        np.bincount(outcomes, weights=weights.real, minlength=size)
        + 1j * np.bincount(outcomes, weights=weights.imag, minlength=size)
    )
    return OutputDistribution(xprog.n, np.abs(amplitudes) ** 2)


def distribution(
    prog: Union[XProgram, ConstantActionProgram],
    backend: BackendName = "fourier",
    settings: Optional[IQPSettings] = None,
) -> OutputDistribution:
    """Exact distribution; multiples of pi/2 short-circuit to their point mass."""
    if backend not in ("fourier", "pathsum"):
        raise ParameterError(f"unknown backend {backend!r}")
    if isinstance(prog, ConstantActionProgram):
        special = classify_special(prog)
        if special.outcome is not None:
            logger.debug(f"{special.kind} program: point mass at {special.outcome}")
            return OutputDistribution.point_mass(prog.n, special.outcome.value)
        if special.kind == "clifford":
            logger.warning("Clifford-class program routed to the generic simulator")
    if backend == "fourier":
        return distribution_fourier(prog, settings)
    return distribution_pathsum(prog, settings)


def sample(
    prog: Union[XProgram, ConstantActionProgram],
    m: int,
    rng: np.random.Generator,
    backend: BackendName = "fourier",
    settings: Optional[IQPSettings] = None,
) -> SampleSet:
    """m independent samples from the exact output distribution."""
    dist = distribution(prog, backend, settings)
    return SampleSet.from_values(dist.n, dist.sample_indices(m, rng))


# ============================================================================
# Biases and entropy
# ============================================================================

def exact_bias(
    prog: ConstantActionProgram,
    s: BitVector,
    settings: Optional[IQPSettings] = None,
) -> float:
    """
    P(X·sᵀ = 0) from the weight distribution of the code spanned by the
    columns of P_s: the mean of cos²(theta·(n_s - 2·wt(c))) over codewords c.
    """
    Ps = submatrix_ps(prog.P, s)
    n_s = Ps.k
    if n_s == 0:
        return 1.0
    code = LinearCode.from_generator(Ps)
    dist = weight_distribution(code, settings)
    theta = prog.theta.radians
    total = sum(
        count * math.cos(theta * (n_s - 2 * w)) ** 2
        for w, count in enumerate(dist.counts)
        if count
    )
    return total / (1 << code.rank)


def bias_from_distribution(dist: OutputDistribution, s: BitVector) -> float:
    """P(X·sᵀ = 0) by direct summation over the distribution."""
    if s.length != dist.n:
        raise ParameterError(f"direction has length {s.length}, expected {dist.n}")
    parity = np.bitwise_count(np.arange(1 << dist.n, dtype=np.uint64) & np.uint64(s.value)) & 1
    return float(dist.probs[parity == 0].sum())


def all_biases(dist: OutputDistribution) -> np.ndarray:
    """Bias in every direction s at once: (1 + W(s)) / 2 with W the transform of probs."""
    return 0.5 * (1.0 + fwht(dist.probs))


def _bits(collision: float) -> float:
    entropy = -math.log2(collision)
    # round-off floor
    return 0.0 if abs(entropy) < 1e-12 else entropy


def collision_entropy(dist: OutputDistribution) -> float:
    """S2 = -log2 sum_x p(x)²."""
    return _bits(float(np.sum(dist.probs ** 2)))


def collision_entropy_via_bias(dist: OutputDistribution) -> float:
    """S2 from the mean over s of (2·bias(s) - 1)²."""
    transform = fwht(dist.probs)
    return _bits(float(np.mean(transform ** 2)))


# ============================================================================
# Export
# ============================================================================

def write_distribution_binary(dist: OutputDistribution, path: PathLike) -> None:
    """8-byte little-endian count, then little-endian float64 probabilities."""
    data = struct.pack("<Q", dist.probs.size) + dist.probs.astype("<f8").tobytes()
    Path(path).write_bytes(data)


def read_distribution_binary(path: PathLike) -> OutputDistribution:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise FormatError("distribution file is truncated")
    (count,) = struct.unpack("<Q", data[:8])
    if count == 0 or count & (count - 1) or len(data) != 8 + 8 * count:
        raise FormatError(f"distribution file holds an invalid count {count}")
    probs = np.frombuffer(data[8:], dtype="<f8")
    return OutputDistribution(count.bit_length() - 1, probs)


def write_distribution_csv(dist: OutputDistribution, path: PathLike) -> None:
    """One "bitstring,probability" line per outcome."""
    lines = ["bitstring,probability"]
    for x, p in enumerate(dist.probs):
        lines.append(f"{BitVector(x, dist.n).to_string()},{p:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
