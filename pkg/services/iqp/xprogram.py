"""
X-program data model.

Contains:
- Action: exact rational multiple of pi
- XProgram (per-element actions) and ConstantActionProgram (matrix + one action)
- P_s extraction, special-case classification, diagonal concatenation
- the X-program text format and random program generation
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Literal, Optional, Sequence, Tuple

import numpy as np

from .errors import FormatError, ParameterError
from .gf2core import BitMatrix, BitVector, format_matrix, parse_matrix

logger = logging.getLogger(__name__)


# ============================================================================
# Actions
# ============================================================================

@dataclass(frozen=True)
class Action:
    """Angle (numerator/denominator)·pi radians, stored in lowest terms."""

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator < 1:
            raise ParameterError(f"action denominator must be >= 1, got {self.denominator}")
        ratio = Fraction(self.numerator, self.denominator)
        object.__setattr__(self, "numerator", ratio.numerator)
        object.__setattr__(self, "denominator", ratio.denominator)

    @classmethod
    def from_fraction(cls, ratio: Fraction) -> "Action":
        return cls(ratio.numerator, ratio.denominator)

    @classmethod
    def parse(cls, text: str) -> "Action":
        """Parse "num/den" or "num" (units of pi)."""
        num, sep, den = text.strip().partition("/")
        try:
            return cls(int(num), int(den) if sep else 1)
        except ValueError as e:
            raise FormatError(f"invalid action {text!r}") from e

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def radians(self) -> float:
        return self.numerator * math.pi / self.denominator

    def __neg__(self) -> "Action":
        return Action(-self.numerator, self.denominator)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


PI_OVER_8 = Action(1, 8)


# ============================================================================
# Programs
# ============================================================================

@dataclass(frozen=True)
class XProgram:
    """Ordered list of (action, row) elements on n qubits."""

    n: int
    elements: Tuple[Tuple[Action, BitVector], ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for i, (_, p) in enumerate(self.elements):
            if p.length != self.n:
                raise ParameterError(f"element {i} has length {p.length}, expected {self.n}")

    @classmethod
    def from_rows(cls, P: BitMatrix, theta: Action) -> "XProgram":
        return cls(P.n, tuple((theta, P.row(i)) for i in range(P.k)))

    @property
    def k(self) -> int:
        return len(self.elements)

    @property
    def matrix(self) -> BitMatrix:
        return BitMatrix(tuple(p.value for _, p in self.elements), self.n)

    def permuted(self, order: Sequence[int]) -> "XProgram":
        if sorted(order) != list(range(self.k)):
            raise ParameterError("order is not a permutation of the elements")
        return XProgram(self.n, tuple(self.elements[i] for i in order))

    def to_xprogram(self) -> "XProgram":
        return self


@dataclass(frozen=True)
class ConstantActionProgram:
    """Program whose elements all share one action."""

    P: BitMatrix
    theta: Action

    @property
    def n(self) -> int:
        return self.P.n

    @property
    def k(self) -> int:
        return self.P.k

    def to_xprogram(self) -> XProgram:
        return XProgram.from_rows(self.P, self.theta)


def as_xprogram(prog) -> XProgram:
    """Accept either program type and return the element-list form."""
    if isinstance(prog, (XProgram, ConstantActionProgram)):
        return prog.to_xprogram()
    raise ParameterError(f"not a program: {type(prog).__name__}")


# ============================================================================
# Operations
# ============================================================================

def submatrix_ps(P: BitMatrix, s: BitVector) -> BitMatrix:
    """Rows p of P with p·sᵀ = 1, in their original order."""
    if s.length != P.n:
        raise ParameterError(f"direction has length {s.length}, expected {P.n}")
    return BitMatrix(tuple(r for r in P.rows if (r & s.value).bit_count() & 1), P.n)


def row_sum(P: BitMatrix) -> BitVector:
    """XOR of all rows."""
    acc = 0
    for r in P.rows:
        acc ^= r
    return BitVector(acc, P.n)


SpecialKind = Literal["always_zero", "always_row_sum", "clifford", "generic"]


@dataclass(frozen=True)
class SpecialCase:
    kind: SpecialKind
    outcome: Optional[BitVector] = None


def classify_special(prog: ConstantActionProgram) -> SpecialCase:
    """
    Classify a constant-action program by theta/pi in lowest terms.

    Denominator 1 always samples 0, denominator 2 always samples the row sum,
    denominator 4 is Clifford; anything else is generic.
    """
    den = prog.theta.denominator
    if den == 1:
        return SpecialCase("always_zero", BitVector.zeros(prog.n))
    if den == 2:
        return SpecialCase("always_row_sum", row_sum(prog.P))
    if den == 4:
        return SpecialCase("clifford")
    return SpecialCase("generic")


def concat_diagonal(p1: ConstantActionProgram, p2: ConstantActionProgram) -> ConstantActionProgram:
    """Block-diagonal concatenation; p2 occupies the trailing columns."""
    if p1.theta != p2.theta:
        raise ParameterError(f"cannot concatenate actions {p1.theta} and {p2.theta}")
    rows = p1.P.rows + tuple(r << p1.n for r in p2.P.rows)
    return ConstantActionProgram(BitMatrix(rows, p1.n + p2.n), p1.theta)


def random_program(n: int, k: int, theta: Action, rng: np.random.Generator) -> ConstantActionProgram:
    """Constant-action program with k uniformly random rows."""
    rows = rng.integers(0, 2, size=(k, n), dtype=np.uint8)
    return ConstantActionProgram(BitMatrix.from_array(rows), theta)


def random_xprogram(
    n: int,
    k: int,
    actions: Sequence[Action],
    rng: np.random.Generator,
) -> XProgram:
    """Program with random rows and each action drawn from `actions`."""
    P = random_program(n, k, actions[0], rng).P
    picks = rng.integers(0, len(actions), size=k)
    return XProgram(n, tuple((actions[int(c)], P.row(i)) for i, c in enumerate(picks)))


# ============================================================================
# Text format
# ============================================================================

def program_from_matrix(headers: Dict[str, str], P: BitMatrix) -> ConstantActionProgram:
    if "theta" not in headers:
        raise FormatError("program file is missing the '# theta=' header")
    return ConstantActionProgram(P, Action.parse(headers["theta"]))


def parse(text: str) -> ConstantActionProgram:
    """Parse an X-program file (matrix format with a mandatory theta header)."""
    headers, P = parse_matrix(text)
    return program_from_matrix(headers, P)


def serialize(prog: ConstantActionProgram, extra_headers: Optional[Dict[str, str]] = None) -> str:
    """Serialize with "# theta=num/den" first, then any extra headers."""
    headers = {"theta": str(prog.theta)}
    headers.update(extra_headers or {})
    return format_matrix(prog.P, headers)
