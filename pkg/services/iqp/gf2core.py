"""
Bit-packed linear algebra over GF(2).

Contains:
- BitVector / BitMatrix value types (rows packed into Python ints)
- rank, canonical column-echelon reduction, linear solving, left kernel, inverse
- random invertible matrices and permutations from an explicit numpy Generator
- the shared matrix text format

Bit convention used everywhere: bit j of a packed int is component j of the
vector, which is character j of its 0/1 string.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import FormatError, ParameterError

logger = logging.getLogger(__name__)

__all__ = [
    "BitVector",
    "BitMatrix",
    "rank",
    "batch_rank",
    "col_echelon_reduce",
    "solve_linear",
    "kernel",
    "inverse",
    "random_invertible",
    "random_permutation",
    "same_column_span",
    "popcount_words",
    "rows_to_array",
    "array_to_rows",
    "parse_matrix",
    "format_matrix",
]


def _parity(value: int) -> int:
    return value.bit_count() & 1


def _mask(n: int) -> int:
    return (1 << n) - 1


# ============================================================================
# Packed conversions
# ============================================================================

def rows_to_array(rows: Sequence[int], n: int) -> np.ndarray:
    """Unpack int rows into a (k, n) uint8 array of 0/1 entries."""
    if not rows or n == 0:
        return np.zeros((len(rows), n), dtype=np.uint8)
    nbytes = (n + 7) // 8
    buf = b"".join(row.to_bytes(nbytes, "little") for row in rows)
    packed = np.frombuffer(buf, dtype=np.uint8).reshape(len(rows), nbytes)
    return np.unpackbits(packed, axis=1, bitorder="little")[:, :n]


def array_to_rows(arr: np.ndarray) -> List[int]:
    """Pack a (k, n) 0/1 array into int rows."""
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise ParameterError(f"expected a 2-d array, got shape {arr.shape}")
    if arr.shape[0] == 0:
        return []
    packed = np.packbits(arr.astype(np.uint8) & 1, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def rows_to_words(rows: Sequence[int], n: int) -> np.ndarray:
    """Pack int rows into a (k, ceil(n/64)) uint64 array."""
    n_words = max(1, (n + 63) // 64)
    out = np.zeros((len(rows), n_words), dtype=np.uint64)
    for i, row in enumerate(rows):
        out[i] = np.frombuffer(row.to_bytes(8 * n_words, "little"), dtype="<u8")
    return out


def popcount_words(words: np.ndarray) -> np.ndarray:
    """Hamming weight of each packed row (sum of popcounts over the last axis)."""
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


# ============================================================================
# Value types
# ============================================================================

@dataclass(frozen=True)
class BitVector:
    """A vector in F2^length, packed into an int."""

    value: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ParameterError("vector length must be non-negative")
        if self.value < 0 or self.value >> self.length:
            raise ParameterError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(0, length)

    @classmethod
    def unit(cls, index: int, length: int) -> "BitVector":
        if not 0 <= index < length:
            raise ParameterError(f"unit index {index} out of range for length {length}")
        return cls(1 << index, length)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        value = 0
        length = 0
        for j, bit in enumerate(bits):
            if bit not in (0, 1):
                raise ParameterError(f"bit {j} is {bit}, expected 0 or 1")
            value |= bit << j
            length = j + 1
        return cls(value, length)

    @classmethod
    def from_string(cls, text: str) -> "BitVector":
        if any(ch not in "01" for ch in text):
            raise FormatError(f"invalid bit string {text!r}")
        return cls.from_bits(int(ch) for ch in text) if text else cls(0, 0)

    def to_string(self) -> str:
        return "".join("1" if (self.value >> j) & 1 else "0" for j in range(self.length))

    def to_array(self) -> np.ndarray:
        return rows_to_array([self.value], self.length)[0]

    def __getitem__(self, index: int) -> int:
        if not 0 <= index < self.length:
            raise IndexError(index)
        return (self.value >> index) & 1

    def __len__(self) -> int:
        return self.length

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._check_length(other)
        return BitVector(self.value ^ other.value, self.length)

    def dot(self, other: "BitVector") -> int:
        """GF(2) inner product."""
        self._check_length(other)
        return _parity(self.value & other.value)

    def weight(self) -> int:
        return self.value.bit_count()

    def is_zero(self) -> bool:
        return self.value == 0

    def _check_length(self, other: "BitVector") -> None:
        if other.length != self.length:
            raise ParameterError(f"length mismatch: {self.length} vs {other.length}")

    def __str__(self) -> str:
        return self.to_string()


@dataclass(frozen=True)
class BitMatrix:
    """A k-by-n matrix over GF(2); each row is an int with bit j = column j."""

    rows: Tuple[int, ...]
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ParameterError("column count must be non-negative")
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        limit = 1 << self.n
        for i, row in enumerate(self.rows):
            if row < 0 or row >= limit:
                raise ParameterError(f"row {i} does not fit in {self.n} columns")

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def zeros(cls, k: int, n: int) -> "BitMatrix":
        return cls((0,) * k, n)

    @classmethod
    def from_strings(cls, lines: Sequence[str], n: Optional[int] = None) -> "BitMatrix":
        if not lines:
            return cls((), n or 0)
        width = len(lines[0]) if n is None else n
        rows = []
        for i, line in enumerate(lines):
            if len(line) != width:
                raise FormatError(f"row {i} has {len(line)} columns, expected {width}")
            rows.append(BitVector.from_string(line).value)
        return cls(tuple(rows), width)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BitMatrix":
        arr = np.asarray(arr)
        return cls(tuple(array_to_rows(arr)), int(arr.shape[1]))

    # ------------------------------------------------------------------
    # Shape and access
    # ------------------------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.k, self.n)

    def row(self, i: int) -> BitVector:
        return BitVector(self.rows[i], self.n)

    def column(self, j: int) -> BitVector:
        return BitVector(sum(((r >> j) & 1) << i for i, r in enumerate(self.rows)), self.k)

    def to_strings(self) -> List[str]:
        return [BitVector(r, self.n).to_string() for r in self.rows]

    def to_array(self) -> np.ndarray:
        return rows_to_array(self.rows, self.n)

    def packed_words(self) -> np.ndarray:
        return rows_to_words(self.rows, self.n)

    # ------------------------------------------------------------------
    # Algebra
    # ------------------------------------------------------------------

    def transpose(self) -> "BitMatrix":
        if self.k == 0 or self.n == 0:
            return BitMatrix((0,) * self.n, self.k)
        return BitMatrix.from_array(self.to_array().T)

    def matmul(self, other: "BitMatrix") -> "BitMatrix":
        if self.n != other.k:
            raise ParameterError(f"shape mismatch: {self.shape} @ {other.shape}")
        out = []
        for row in self.rows:
            acc = 0
            j = 0
            while row:
                if row & 1:
                    acc ^= other.rows[j]
                row >>= 1
                j += 1
            out.append(acc)
        return BitMatrix(tuple(out), other.n)

    def apply(self, v: BitVector) -> BitVector:
        """Matrix-vector product M·vᵀ."""
        if v.length != self.n:
            raise ParameterError(f"vector length {v.length} does not match {self.n} columns")
        return BitVector(sum(_parity(r & v.value) << i for i, r in enumerate(self.rows)), self.k)

    def left_apply(self, v: BitVector) -> BitVector:
        """Row-vector product v·M."""
        if v.length != self.k:
            raise ParameterError(f"vector length {v.length} does not match {self.k} rows")
        acc = 0
        for i, r in enumerate(self.rows):
            if (v.value >> i) & 1:
                acc ^= r
        return BitVector(acc, self.n)

    def hstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.k != other.k:
            raise ParameterError(f"row count mismatch: {self.k} vs {other.k}")
        return BitMatrix(tuple(a | (b << self.n) for a, b in zip(self.rows, other.rows)), self.n + other.n)

    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.n != other.n:
            raise ParameterError(f"column count mismatch: {self.n} vs {other.n}")
        return BitMatrix(self.rows + other.rows, self.n)

    def append_column(self, column: BitVector) -> "BitMatrix":
        if column.length != self.k:
            raise ParameterError(f"column length {column.length} does not match {self.k} rows")
        return BitMatrix(
            tuple(r | (((column.value >> i) & 1) << self.n) for i, r in enumerate(self.rows)),
            self.n + 1,
        )

    def select_rows(self, indices: Sequence[int]) -> "BitMatrix":
        return BitMatrix(tuple(self.rows[i] for i in indices), self.n)

    def select_columns(self, count: int) -> "BitMatrix":
        """Keep the first `count` columns."""
        return BitMatrix(tuple(r & _mask(count) for r in self.rows), count)

    def permute_rows(self, order: Sequence[int]) -> "BitMatrix":
        """Row i of the result is row order[i] of self."""
        if sorted(order) != list(range(self.k)):
            raise ParameterError("order is not a permutation of the rows")
        return self.select_rows(order)

    def __str__(self) -> str:
        return "\n".join(self.to_strings())


# ============================================================================
# Elimination
# ============================================================================

def _eliminate(rows: Sequence[int]) -> Tuple[Dict[int, Tuple[int, int]], List[int]]:
    """
    Forward elimination keyed on the lowest set bit.

    Returns (pivots, dependencies): pivots maps pivot bit to (reduced row,
    combination of input rows), dependencies lists the combinations of input
    rows that reduced to zero.
    """
    pivots: Dict[int, Tuple[int, int]] = {}
    dependencies: List[int] = []
    for i, row in enumerate(rows):
        combo = 1 << i
        while row:
            low = (row & -row).bit_length() - 1
            if low not in pivots:
                pivots[low] = (row, combo)
                break
            prow, pcombo = pivots[low]
            row ^= prow
            combo ^= pcombo
        else:
            dependencies.append(combo)
    return pivots, dependencies


def rank(M: BitMatrix) -> int:
    """Rank of M over GF(2)."""
    pivots, _ = _eliminate(M.rows)
    return len(pivots)


def batch_rank(mats: np.ndarray) -> np.ndarray:
    """Ranks over GF(2) of a stack of 0/1 matrices with shape (batch, rows, cols)."""
    A = np.asarray(mats, dtype=np.uint8) & 1
    if A.ndim != 3:
        raise ParameterError(f"expected a 3-d array, got shape {A.shape}")
    A = A.copy()
    batch, n_rows, n_cols = A.shape
    ranks = np.zeros(batch, dtype=np.int64)
    row_index = np.arange(n_rows)
    for col in range(n_cols):
        eligible = (A[:, :, col] == 1) & (row_index[None, :] >= ranks[:, None])
        active = np.nonzero(eligible.any(axis=1))[0]
        if active.size == 0:
            continue
        pivot = eligible[active].argmax(axis=1)
        target = ranks[active]
        pivot_rows = A[active, pivot].copy()
        A[active, pivot] = A[active, target]
        A[active, target] = pivot_rows
        hits = A[active, :, col].copy()
        hits[np.arange(active.size), target] = 0
        A[active] ^= hits[:, :, None] & pivot_rows[:, None, :]
        ranks[active] += 1
    return ranks


def col_echelon_reduce(M: BitMatrix) -> Tuple[BitMatrix, BitMatrix]:
    """
    Canonical column-echelon form of M with zero columns deleted.

    Column j of R has its leading 1 at row lead(j), with lead strictly
    increasing in j, and every other column of R is 0 at each leading row.
    T is an invertible n-by-n matrix with M·T = [R | 0].

    Returns:
        (R, T)
    """
    # Columns of M are rows of Mᵀ; reduce those to RREF keyed on the lowest
    # row index, tracking the combination in E so that E·Mᵀ = RREF.
    cols = list(M.transpose().rows) if M.k else [0] * M.n
    combos = [1 << j for j in range(M.n)]
    lead_rows: List[int] = []
    r = 0
    for bit in range(M.k):
        pivot = next((i for i in range(r, M.n) if (cols[i] >> bit) & 1), None)
        if pivot is None:
            continue
        cols[r], cols[pivot] = cols[pivot], cols[r]
        combos[r], combos[pivot] = combos[pivot], combos[r]
        for i in range(M.n):
            if i != r and (cols[i] >> bit) & 1:
                cols[i] ^= cols[r]
                combos[i] ^= combos[r]
        lead_rows.append(bit)
        r += 1
    R = BitMatrix(tuple(cols[:r]), M.k).transpose() if r else BitMatrix((0,) * M.k, 0)
    T = BitMatrix(tuple(combos), M.n).transpose()
    logger.debug(f"Column-reduced {M.k}x{M.n} matrix to rank {r}")
    return R, T


def solve_linear(M: BitMatrix, b: BitVector) -> Optional[BitVector]:
    """
    Solve M·sᵀ = b, returning the lexicographically smallest solution.

    Pivot columns are chosen from the highest index down, so every pivot
    variable depends only on lower-index free variables; setting all free
    variables to 0 then minimises the 0/1 string of s.

    Returns:
        A solution, or None if the system is inconsistent.
    """
    if b.length != M.k:
        raise ParameterError(f"right-hand side has length {b.length}, expected {M.k}")
    rows = list(M.rows)
    rhs = [(b.value >> i) & 1 for i in range(M.k)]
    pivot_of_row: List[Tuple[int, int]] = []
    r = 0
    for col in range(M.n - 1, -1, -1):
        pivot = next((i for i in range(r, M.k) if (rows[i] >> col) & 1), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        rhs[r], rhs[pivot] = rhs[pivot], rhs[r]
        for i in range(M.k):
            if i != r and (rows[i] >> col) & 1:
                rows[i] ^= rows[r]
                rhs[i] ^= rhs[r]
        pivot_of_row.append((r, col))
        r += 1
    if any(rhs[i] for i in range(r, M.k)):
        return None
    value = 0
    for row_index, col in pivot_of_row:
        if rhs[row_index]:
            value |= 1 << col
    return BitVector(value, M.n)


def kernel(M: BitMatrix) -> BitMatrix:
    """
    Basis of the left kernel {v : v·M = 0}, one basis vector per row.

    The basis has k - rank(M) rows of length k.
    """
    _, dependencies = _eliminate(M.rows)
    return BitMatrix(tuple(dependencies), M.k)


def inverse(M: BitMatrix) -> BitMatrix:
    """Inverse of a square invertible matrix."""
    if M.k != M.n:
        raise ParameterError(f"cannot invert a non-square {M.k}x{M.n} matrix")
    n = M.n
    rows = [row | (1 << (n + i)) for i, row in enumerate(M.rows)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if (rows[i] >> col) & 1), None)
        if pivot is None:
            raise ParameterError("matrix is singular")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        for i in range(n):
            if i != col and (rows[i] >> col) & 1:
                rows[i] ^= rows[col]
    return BitMatrix(tuple(row >> n for row in rows), n)


def same_column_span(M1: BitMatrix, M2: BitMatrix) -> bool:
    """True iff the columns of M1 and M2 span the same subspace of F2^k."""
    if M1.k != M2.k:
        raise ParameterError(f"row count mismatch: {M1.k} vs {M2.k}")
    r1 = rank(M1)
    return r1 == rank(M2) and rank(M1.hstack(M2)) == r1


# ============================================================================
# Randomness
# ============================================================================

def random_invertible(n: int, rng: np.random.Generator) -> BitMatrix:
    """Uniformly random invertible n-by-n matrix by rejection sampling."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    attempts = 0
    while True:
        attempts += 1
        candidate = BitMatrix.from_array(rng.integers(0, 2, size=(n, n), dtype=np.uint8))
        if rank(candidate) == n:
            logger.debug(f"Invertible {n}x{n} matrix after {attempts} draws")
            return candidate


def random_permutation(k: int, rng: np.random.Generator) -> Tuple[int, ...]:
    """Uniformly random permutation of range(k)."""
    return tuple(int(i) for i in rng.permutation(k))


# ============================================================================
# Text format
# ============================================================================

def parse_matrix(text: str) -> Tuple[Dict[str, str], BitMatrix]:
    """
    Parse the matrix text format.

    Header lines look like "# key=value"; the remaining non-empty lines are
    rows of equal length over {0,1}. A matrix with no rows needs "# n=<int>".

    Returns:
        (headers, matrix)
    """
    headers: Dict[str, str] = {}
    lines: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line:
            continue
        if line.startswith("#"):
            if lines:
                raise FormatError(f"line {lineno}: header after data rows")
            body = line[1:].strip()
            key, sep, value = body.partition("=")
            if not sep or not key.strip():
                raise FormatError(f"line {lineno}: malformed header {line!r}")
            headers[key.strip()] = value.strip()
            continue
        if any(ch not in "01" for ch in line):
            raise FormatError(f"line {lineno}: characters outside {{0,1}} in {line!r}")
        lines.append(line)

    declared: Optional[int] = None
    if "n" in headers:
        try:
            declared = int(headers["n"])
        except ValueError as e:
            raise FormatError(f"invalid column count {headers['n']!r}") from e
        if declared < 0:
            raise FormatError("column count must be non-negative")
    if not lines:
        if declared is None:
            raise FormatError("matrix without rows needs an '# n=' header")
        return headers, BitMatrix((), declared)
    width = len(lines[0])
    if declared is not None and declared != width:
        raise FormatError(f"rows have {width} columns but header declares n={declared}")
    return headers, BitMatrix.from_strings(lines, width)


def format_matrix(M: BitMatrix, headers: Optional[Dict[str, str]] = None) -> str:
    """Serialize a matrix with optional headers; newline-terminated."""
    out = [f"# {key}={value}" for key, value in (headers or {}).items()]
    if M.k == 0:
        out.append(f"# n={M.n}")
    out.extend(M.to_strings())
    return "\n".join(out) + "\n"
