"""
Architecture reductions between X-programs, Z-networks and Graph-programs.

Contains:
- ZNetwork (CNOT / X / Z-rotation gate lists, Hadamard-basis input and output)
- GraphProgram (graph state plus per-vertex measurement rotations)
- PostProcess (classical linear map then projection)
- the three program transformations and dense statevector simulators
- text formats for networks and graphs, degree statistics
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from .config import IQPSettings, resolve_settings
from .errors import FormatError, InfeasibleSizeError, ParameterError
from .gf2core import BitMatrix, inverse
from .simulator import OutputDistribution, SampleSet, fwht
from .xprogram import Action, ConstantActionProgram, XProgram, as_xprogram

logger = logging.getLogger(__name__)


# ============================================================================
# Z-networks
# ============================================================================

@dataclass(frozen=True)
class CNOT:
    control: int
    target: int


@dataclass(frozen=True)
class XGate:
    qubit: int


@dataclass(frozen=True)
class ZRotation:
    """exp(i·theta·Z) on one qubit."""
    theta: Action
    qubit: int


Gate = Union[CNOT, XGate, ZRotation]


@dataclass(frozen=True)
class ZNetwork:
    """Gate list on n qubits, fed |+>^n and measured in the Hadamard basis."""

    n: int
    gates: Tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for i, gate in enumerate(self.gates):
            if isinstance(gate, CNOT):
                qubits = (gate.control, gate.target)
                if gate.control == gate.target:
                    raise ParameterError(f"gate {i}: CNOT control equals target")
            elif isinstance(gate, (XGate, ZRotation)):
                qubits = (gate.qubit,)
            else:
                raise ParameterError(f"gate {i}: disallowed gate kind {type(gate).__name__}")
            if any(not 0 <= q < self.n for q in qubits):
                raise ParameterError(f"gate {i}: qubit index out of range for n={self.n}")


@dataclass(frozen=True)
class PostProcess:
    """y = linear·x on the full register, then keep the listed coordinates in order."""

    linear: BitMatrix
    keep: Tuple[int, ...]

    def __post_init__(self):
        if self.linear.k != self.linear.n:
            raise ParameterError("post-process map must be square")
        object.__setattr__(self, "keep", tuple(self.keep))
        if any(not 0 <= j < self.linear.n for j in self.keep):
            raise ParameterError("kept coordinate out of range")

    @classmethod
    def identity(cls, n: int) -> "PostProcess":
        return cls(BitMatrix.identity(n), tuple(range(n)))

    @property
    def width_in(self) -> int:
        return self.linear.n

    @property
    def width_out(self) -> int:
        return len(self.keep)

    def apply_value(self, x: int) -> int:
        out = 0
        for pos, j in enumerate(self.keep):
            out |= ((self.linear.rows[j] & x).bit_count() & 1) << pos
        return out


def xprogram_to_znetwork(prog: Union[XProgram, ConstantActionProgram]) -> ZNetwork:
    """
    One phase gadget per element: CNOTs from the rest of supp(p) onto its
    lowest qubit, a Z rotation there, then the CNOTs undone. Empty rows are
    a global phase and are skipped.
    """
    xprog = as_xprogram(prog)
    gates: List[Gate] = []
    for theta, p in xprog.elements:
        support = [j for j in range(xprog.n) if p[j]]
        if not support:
            continue
        pivot, rest = support[0], support[1:]
        cascade = [CNOT(j, pivot) for j in rest]
        gates.extend(cascade)
        gates.append(ZRotation(theta, pivot))
        gates.extend(reversed(cascade))
    return ZNetwork(xprog.n, tuple(gates))


def trace_frames(net: ZNetwork) -> Iterator[Tuple[Gate, BitMatrix, int]]:
    """
    Walk the network keeping the affine frame b = L·a ⊕ c of the computational
    label b in terms of the input label a. Yields (gate, L, c) after each gate.
    """
    rows = [1 << j for j in range(net.n)]
    offset = 0
    for gate in net.gates:
        if isinstance(gate, CNOT):
            rows[gate.target] ^= rows[gate.control]
            offset ^= ((offset >> gate.control) & 1) << gate.target
        elif isinstance(gate, XGate):
            offset ^= 1 << gate.qubit
        yield gate, BitMatrix(tuple(rows), net.n), offset


def znetwork_to_xprogram(net: ZNetwork) -> Tuple[XProgram, PostProcess]:
    """
    Each Z rotation on qubit j becomes (±theta, row j of the frame), negated
    when the frame offset has flipped qubit j. X gates emit no element. The
    post-process maps X-program outcomes x to network outcomes (Lᵀ)^-1·x.
    """
    elements = []
    frame = BitMatrix.identity(net.n)
    for gate, frame, offset in trace_frames(net):
        if isinstance(gate, ZRotation):
            theta = -gate.theta if (offset >> gate.qubit) & 1 else gate.theta
            elements.append((theta, frame.row(gate.qubit)))
    post = PostProcess(inverse(frame.transpose()), tuple(range(net.n)))
    return XProgram(net.n, tuple(elements)), post


# ============================================================================
# Graph programs
# ============================================================================

@dataclass(frozen=True)
class VertexLabel:
    """Measurement rotation: Hadamard, or exp(i·theta·X)."""
    kind: Literal["H", "X"]
    theta: Optional[Action] = None

    def __post_init__(self):
        if (self.kind == "X") != (self.theta is not None):
            raise ParameterError("X labels need an action and H labels must not have one")


HADAMARD = VertexLabel("H")


@dataclass(frozen=True)
class GraphProgram:
    """Graph state on n_vertices qubits; vertices below n_primal are primal."""

    n_vertices: int
    edges: Tuple[Tuple[int, int], ...]
    labels: Tuple[VertexLabel, ...]
    n_primal: int

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != self.n_vertices:
            raise ParameterError(f"{len(self.labels)} labels for {self.n_vertices} vertices")
        if not 0 <= self.n_primal <= self.n_vertices:
            raise ParameterError("primal count out of range")
        for u, v in self.edges:
            if u == v or not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ParameterError(f"invalid edge ({u}, {v})")

    def degrees(self) -> List[int]:
        deg = [0] * self.n_vertices
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass(frozen=True)
class DegreeStatistics:
    primal_min: int
    primal_max: int
    primal_mean: float
    ancilla_min: int
    ancilla_max: int
    ancilla_mean: float


def degree_statistics(gp: GraphProgram) -> DegreeStatistics:
    deg = gp.degrees()
    primal = deg[:gp.n_primal] or [0]
    ancilla = deg[gp.n_primal:] or [0]
    return DegreeStatistics(
        min(primal), max(primal), sum(primal) / len(primal),
        min(ancilla), max(ancilla), sum(ancilla) / len(ancilla),
    )


def xprogram_to_graphprogram(prog: Union[XProgram, ConstantActionProgram]) -> Tuple[GraphProgram, PostProcess]:
    """
    Bipartite graph: primal vertex j joined to ancilla n+i iff p_i has bit j.
    Primal vertices are measured after a Hadamard, ancilla n+i after
    exp(i·theta_i·X). Post-processing XORs every ancilla bit into its primal
    neighbours and keeps the primal bits.
    """
    xprog = as_xprogram(prog)
    n, k = xprog.n, xprog.k
    edges = []
    labels = [HADAMARD] * n
    for i, (theta, p) in enumerate(xprog.elements):
        edges.extend((j, n + i) for j in range(n) if p[j])
        labels.append(VertexLabel("X", theta))
    rows = []
    for j in range(n):
        row = 1 << j
        for i, (_, p) in enumerate(xprog.elements):
            if p[j]:
                row |= 1 << (n + i)
        rows.append(row)
    rows.extend(1 << (n + i) for i in range(k))
    gp = GraphProgram(n + k, tuple(edges), tuple(labels), n)
    return gp, PostProcess(BitMatrix(tuple(rows), n + k), tuple(range(n)))


# ============================================================================
# Statevector simulation
# ============================================================================

def _check_qubits(count: int, settings: IQPSettings) -> None:
    if count > settings.statevector_max_qubits:
        raise InfeasibleSizeError("qubits", count, settings.statevector_max_qubits)


def _apply_single(state: np.ndarray, n: int, qubit: int, gate: np.ndarray) -> np.ndarray:
    view = state.reshape(1 << (n - qubit - 1), 2, 1 << qubit)
    return np.einsum("ab,ibj->iaj", gate, view).reshape(-1)


def _bit(index: np.ndarray, j: int) -> np.ndarray:
    return (index >> j) & 1


def simulate_znetwork(net: ZNetwork, settings: Optional[IQPSettings] = None) -> OutputDistribution:
    """Dense statevector: |+>^n in, gates applied, Hadamard-basis readout."""
    settings = resolve_settings(settings)
    _check_qubits(net.n, settings)
    size = 1 << net.n
    index = np.arange(size, dtype=np.int64)
    state = np.full(size, 1.0 / math.sqrt(size), dtype=np.complex128)
    for gate in net.gates:
        if isinstance(gate, CNOT):
            state = state[index ^ (_bit(index, gate.control) << gate.target)]
        elif isinstance(gate, XGate):
            state = state[index ^ (1 << gate.qubit)]
        else:
            angle = gate.theta.radians
            phases = np.where(_bit(index, gate.qubit) == 0, np.exp(1j * angle), np.exp(-1j * angle))
            state = state * phases
    amplitudes = fwht(state) / math.sqrt(size)
    return OutputDistribution(net.n, np.abs(amplitudes) ** 2)


def _label_matrix(label: VertexLabel) -> np.ndarray:
    if label.kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
    angle = label.theta.radians
    c, s = math.cos(angle), 1j * math.sin(angle)
    return np.array([[c, s], [s, c]], dtype=np.complex128)


def simulate_graphprogram(gp: GraphProgram, settings: Optional[IQPSettings] = None) -> OutputDistribution:
    """Dense statevector: |+> on every vertex, CZ per edge, label rotations, readout."""
    settings = resolve_settings(settings)
    _check_qubits(gp.n_vertices, settings)
    size = 1 << gp.n_vertices
    index = np.arange(size, dtype=np.int64)
    state = np.full(size, 1.0 / math.sqrt(size), dtype=np.complex128)
    for u, v in gp.edges:
        state = state * (1 - 2 * (_bit(index, u) & _bit(index, v)))
    for vertex, label in enumerate(gp.labels):
        state = _apply_single(state, gp.n_vertices, vertex, _label_matrix(label))
    return OutputDistribution(gp.n_vertices, np.abs(state) ** 2)


# ============================================================================
# Post-processing
# ============================================================================

def apply_postprocess(pp: PostProcess, samples: SampleSet) -> SampleSet:
    if samples.n != pp.width_in:
        raise ParameterError(f"samples have {samples.n} bits, post-process expects {pp.width_in}")
    return SampleSet.from_values(pp.width_out, [pp.apply_value(x.value) for x in samples])


def pushforward(dist: OutputDistribution, pp: PostProcess) -> OutputDistribution:
    """Distribution of pp(x) for x drawn from dist."""
    if dist.n != pp.width_in:
        raise ParameterError(f"distribution has {dist.n} bits, post-process expects {pp.width_in}")
    index = np.arange(1 << dist.n, dtype=np.uint64)
    image = np.zeros(index.shape, dtype=np.int64)
    for pos, j in enumerate(pp.keep):
        parity = np.bitwise_count(index & np.uint64(pp.linear.rows[j])) & 1
        image |= parity.astype(np.int64) << pos
    probs = np.bincount(image, weights=dist.probs, minlength=1 << pp.width_out)
    return OutputDistribution(pp.width_out, probs)


def marginal(dist: OutputDistribution, coordinates: Sequence[int]) -> OutputDistribution:
    """Marginal distribution of the listed coordinates, in order."""
    return pushforward(dist, PostProcess(BitMatrix.identity(dist.n), tuple(coordinates)))


# ============================================================================
# Text formats
# ============================================================================

def format_znetwork(net: ZNetwork) -> str:
    lines = [f"# n={net.n}"]
    for gate in net.gates:
        if isinstance(gate, CNOT):
            lines.append(f"CNOT {gate.control} {gate.target}")
        elif isinstance(gate, XGate):
            lines.append(f"X {gate.qubit}")
        else:
            lines.append(f"RZ {gate.theta} {gate.qubit}")
    return "\n".join(lines) + "\n"


def _ints(parts: Sequence[str], lineno: int) -> List[int]:
    try:
        return [int(p) for p in parts]
    except ValueError as e:
        raise FormatError(f"line {lineno}: expected integers, got {' '.join(parts)!r}") from e


def parse_znetwork(text: str) -> ZNetwork:
    n: Optional[int] = None
    gates: List[Gate] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "n":
                n = _ints([value.strip()], lineno)[0]
            continue
        parts = line.split()
        kind, args = parts[0], parts[1:]
        if kind == "CNOT" and len(args) == 2:
            gates.append(CNOT(*_ints(args, lineno)))
        elif kind == "X" and len(args) == 1:
            gates.append(XGate(_ints(args, lineno)[0]))
        elif kind == "RZ" and len(args) == 2:
            gates.append(ZRotation(Action.parse(args[0]), _ints(args[1:], lineno)[0]))
        else:
            raise FormatError(f"line {lineno}: disallowed gate {line!r}")
    if n is None:
        raise FormatError("network file is missing the '# n=' header")
    try:
        return ZNetwork(n, tuple(gates))
    except ParameterError as e:
        raise FormatError(str(e)) from e


def format_graphprogram(gp: GraphProgram) -> str:
    lines = [f"# primal={gp.n_primal}", f"V {gp.n_vertices}"]
    lines.extend(f"E {u} {v}" for u, v in gp.edges)
    for vertex, label in enumerate(gp.labels):
        lines.append(f"L {vertex} H" if label.kind == "H" else f"L {vertex} X {label.theta}")
    return "\n".join(lines) + "\n"


def parse_graphprogram(text: str) -> GraphProgram:
    n_primal: Optional[int] = None
    n_vertices: Optional[int] = None
    edges: List[Tuple[int, int]] = []
    labels: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "primal":
                n_primal = _ints([value.strip()], lineno)[0]
            continue
        parts = line.split()
        if parts[0] == "V" and len(parts) == 2:
            n_vertices = _ints(parts[1:], lineno)[0]
        elif parts[0] == "E" and len(parts) == 3:
            u, v = _ints(parts[1:], lineno)
            edges.append((u, v))
        elif parts[0] == "L" and len(parts) == 3 and parts[2] == "H":
            labels[_ints(parts[1:2], lineno)[0]] = HADAMARD
        elif parts[0] == "L" and len(parts) == 4 and parts[2] == "X":
            labels[_ints(parts[1:2], lineno)[0]] = VertexLabel("X", Action.parse(parts[3]))
        else:
            raise FormatError(f"line {lineno}: unrecognised graph line {line!r}")
    if n_vertices is None or n_primal is None:
        raise FormatError("graph file needs '# primal=' and 'V' lines")
    if sorted(labels) != list(range(n_vertices)):
        raise FormatError("every vertex needs exactly one label")
    try:
        return GraphProgram(n_vertices, tuple(edges), tuple(labels[v] for v in range(n_vertices)), n_primal)
    except ParameterError as e:
        raise FormatError(str(e)) from e
