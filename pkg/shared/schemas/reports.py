from typing import Literal, Optional
from pydantic import BaseModel, Field


Backend = Literal["fourier", "pathsum"]
ReductionTarget = Literal["znet", "graph"]


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.10f}"
    if value is None:
        return "none"
    return str(value)


class RecordModel(BaseModel):
    """Base for reports printed as a single `key=value` line."""

    def to_record(self) -> str:
        """Render fields in declaration order as one line of key=value pairs."""
        return " ".join(
            f"{name}={_format_value(value)}" for name, value in self.model_dump().items()
        )


# ============================================================================
# Challenger / Prover Records
# ============================================================================

class GenRecord(RecordModel):
    """Result of generating a challenge."""
    command: Literal["gen"] = "gen"
    challenge_id: str = Field(..., description="Opaque challenge identifier")
    q: int = Field(..., description="Quadratic residue code length")
    rows: int = Field(..., ge=0, description="Rows of the published matrix")
    columns: int = Field(..., ge=0, description="Columns of the published matrix")
    obfuscation_rows: int = Field(..., ge=0, description="Rows orthogonal to the secret")


class ProveRecord(RecordModel):
    """Result of running a prover."""
    command: Literal["prove", "cheat"] = Field(..., description="Prover command that ran")
    challenge_id: str = Field(..., description="Challenge that was answered")
    prover: Literal["honest", "cheat"] = Field(..., description="Prover strategy")
    m: int = Field(..., ge=0, description="Samples written")
    columns: int = Field(..., ge=0, description="Sample width")


# ============================================================================
# Analysis Records
# ============================================================================

class SimulateRecord(RecordModel):
    """Summary of an exported output distribution."""
    command: Literal["simulate"] = "simulate"
    n: int = Field(..., ge=0, description="Qubit count")
    backend: Backend = Field(..., description="Simulation backend")
    collision_entropy: float = Field(..., description="Collision entropy in bits")
    max_probability: float = Field(..., description="Largest outcome probability")


class BiasRecord(RecordModel):
    """Exact directional biases of a program."""
    command: Literal["bias"] = "bias"
    s: str = Field(..., description="Direction as a 0/1 string")
    n_s: int = Field(..., ge=0, description="Rows not orthogonal to s")
    code_rank: int = Field(..., ge=0, description="Rank of the rows not orthogonal to s")
    quantum_bias: float = Field(..., description="Probability an honest sample is orthogonal to s")
    classical_bias: float = Field(..., description="Same probability for the classical sampler")


class EntropyRecord(RecordModel):
    """Collision entropy by both formulas."""
    command: Literal["entropy"] = "entropy"
    n: int = Field(..., ge=0, description="Qubit count")
    collision_entropy: float = Field(..., description="-log2 of the collision probability")
    collision_entropy_via_bias: float = Field(..., description="Same value from all directional biases")


class ReduceRecord(RecordModel):
    """Summary of an architecture reduction."""
    command: Literal["reduce"] = "reduce"
    target: ReductionTarget = Field(..., description="Target representation")
    qubits: int = Field(..., ge=0, description="Qubits or graph vertices")
    gates: Optional[int] = Field(None, description="Gate count of a Z-network")
    edges: Optional[int] = Field(None, description="Edge count of a graph program")
    primal_degree_max: Optional[int] = Field(None, description="Largest primal vertex degree")
    ancilla_degree_max: Optional[int] = Field(None, description="Largest ancilla vertex degree")
    ancilla_degree_mean: Optional[float] = Field(None, description="Mean ancilla vertex degree")


class EntropyExperimentRecord(RecordModel):
    """Collision entropy measured over random constant-action programs."""
    command: Literal["experiment-entropy"] = "experiment-entropy"
    n: int = Field(..., ge=1, description="Qubit count")
    k: int = Field(..., ge=0, description="Rows per program")
    trials: int = Field(..., ge=1, description="Programs sampled")
    mean_entropy: float = Field(..., description="Mean collision entropy")
    mean_gap: float = Field(..., description="Mean of n minus collision entropy")
    min_entropy: float = Field(..., description="Smallest observed collision entropy")
    max_entropy: float = Field(..., description="Largest observed collision entropy")
