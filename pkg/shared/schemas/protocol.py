from typing import Literal, Optional
from pydantic import Field

from .reports import RecordModel


DedupMode = Literal["auto", "keep-one", "off"]
Decision = Literal["accept", "reject", "inconclusive"]
ProverTag = Literal["honest", "cheat", "external"]


class VerifyParams(RecordModel):
    """Hypothesis-test constants used by the verifier."""

    threshold: float = Field(..., gt=0.0, le=1.0, description="Minimum orthogonal fraction to accept")
    m_min: int = Field(..., ge=1, description="Minimum filtered sample count for a decision")
    delta: float = Field(..., gt=0.0, lt=1.0, description="Target bound on both error probabilities")
    dedup: DedupMode = Field(
        "auto",
        description="Duplicate handling: keep-one, off, or auto (keep-one only on wide challenges)",
    )
    calibrated: bool = Field(False, description="Threshold and floor derived from exact filtered biases")
    max_outcome_prob: Optional[float] = Field(
        None,
        ge=0.0,
        le=1.0,
        description="Largest honest probability of a nonzero outcome, used to cap replays under auto",
    )


class VerifyReport(RecordModel):
    """Statistics and decision of one verification."""

    command: Literal["verify"] = "verify"
    challenge_id: str = Field(..., description="Challenge that was verified")
    m_raw: int = Field(..., ge=0, description="Samples in the transcript")
    m_filtered: int = Field(..., ge=0, description="Samples left after filtering")
    bias_observed: float = Field(..., ge=0.0, le=1.0, description="Fraction of filtered samples orthogonal to s")
    threshold: float = Field(..., description="Acceptance threshold")
    m_min: int = Field(..., ge=1, description="Minimum filtered count")
    dedup_applied: bool = Field(..., description="Whether duplicates were collapsed")
    replay_cap: Optional[int] = Field(None, ge=1, description="Per-outcome multiplicity cap, when one applied")
    calibrated: bool = Field(False, description="Whether exact filtered biases set the test")
    decision: Decision = Field(..., description="Verifier decision")
